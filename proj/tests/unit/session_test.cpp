#include <gtest/gtest.h>
#include <opencv2/core.hpp>

#include "facedit/errors.hpp"
#include "facedit/session.hpp"

namespace facedit {
namespace {

bool same(const cv::Mat& a, const cv::Mat& b) { return cv::countNonZero(a != b) == 0; }

TEST(ParseStrokes, ObjectAndArrayForms) {
  const auto one = parse_strokes(R"({"rev":1,"op":"add","points":[[1,2],[3,4]],"width":2})");
  ASSERT_EQ(one.size(), 1U);
  EXPECT_EQ(one[0].rev, 1);
  EXPECT_EQ(one[0].op, Stroke::Op::kAdd);
  EXPECT_EQ(one[0].points.size(), 2U);
  EXPECT_EQ(one[0].width, 2.0);
  const auto many = parse_strokes(
      R"([{"rev":2,"op":"erase","points":[[0,0]],"width":1},{"rev":3,"op":"add","points":[[5,5]],"width":3}])");
  ASSERT_EQ(many.size(), 2U);
  EXPECT_EQ(many[0].op, Stroke::Op::kErase);
  EXPECT_TRUE(parse_strokes("[]").empty());
}

TEST(ParseStrokes, MalformedEventsAreRejected) {
  for (const char* bad : {
           "not json",
           R"({"op":"add","points":[[1,2]],"width":1})",
           R"({"rev":1,"op":"paint","points":[[1,2]],"width":1})",
           R"({"rev":1,"op":"add","points":[],"width":1})",
           R"({"rev":1,"op":"add","points":[[1]],"width":1})",
           R"({"rev":1,"op":"add","points":[[1,2]],"width":0})",
           R"({"rev":1,"op":"add","points":[[1,2]],"width":-3})",
       }) {
    EXPECT_THROW(parse_strokes(bad), InvalidInput) << bad;
  }
}

TEST(RasterizeStroke, HorizontalUnitLineMatchesPixelOracle) {
  cv::Mat canvas(16, 16, CV_8UC1, cv::Scalar(255));
  Stroke s;
  s.points = {{2, 5}, {12, 5}};
  s.width = 1;
  rasterize_stroke(canvas, s);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const bool on = y == 5 && x >= 2 && x <= 12;
      EXPECT_EQ(canvas.at<std::uint8_t>(y, x), on ? 0 : 255) << x << "," << y;
    }
  }
}

TEST(RasterizeStroke, SinglePointPaintsADot) {
  cv::Mat canvas(16, 16, CV_8UC1, cv::Scalar(255));
  Stroke s;
  s.points = {{7.4, 8.6}};
  s.width = 1;
  rasterize_stroke(canvas, s);
  EXPECT_EQ(cv::countNonZero(canvas == 0), 1);
  EXPECT_EQ(canvas.at<std::uint8_t>(9, 7), 0);
}

TEST(EditSession, AddThenEraseRestoresCanvas) {
  EditSession session("s", 64);
  const auto blank = session.canvas();
  Stroke add;
  add.rev = 1;
  add.points = {{10, 10}, {40, 30}, {50, 12}};
  add.width = 3;
  ASSERT_TRUE(session.apply({add}));
  EXPECT_FALSE(same(session.canvas(), blank));
  Stroke erase = add;
  erase.rev = 2;
  erase.op = Stroke::Op::kErase;
  ASSERT_TRUE(session.apply({erase}));
  EXPECT_TRUE(same(session.canvas(), blank));
  EXPECT_EQ(session.revision(), 2);
}

TEST(EditSession, EmptyListLeavesRevision) {
  EditSession session("s", 32);
  EXPECT_FALSE(session.apply({}));
  EXPECT_EQ(session.revision(), 0);
}

TEST(EditSession, StaleOrOversizedUpdatesAreAtomic) {
  EditSession session("s", 32);
  Stroke a;
  a.rev = 5;
  a.points = {{1, 1}};
  ASSERT_TRUE(session.apply({a}));
  const auto before = session.canvas();

  Stroke fresh;
  fresh.rev = 6;
  fresh.points = {{20, 20}};
  Stroke stale = fresh;
  stale.rev = 4;
  EXPECT_THROW(session.apply({fresh, stale}), InvalidInput);
  EXPECT_EQ(session.revision(), 5);
  EXPECT_TRUE(same(session.canvas(), before));

  Stroke wide = fresh;
  wide.width = 100;
  EXPECT_THROW(session.apply({wide}), InvalidInput);
  EXPECT_EQ(session.revision(), 5);

  EXPECT_THROW(session.select_appearance(5, "x", torch::zeros({3, 32, 32})), InvalidInput);
  session.select_appearance(7, "x", torch::zeros({3, 32, 32}));
  EXPECT_EQ(session.revision(), 7);
  EXPECT_EQ(session.snapshot().appearance_id, "x");
}

TEST(EditSession, SnapshotIsBinaryAndFramesAreMonotone) {
  EditSession session("s", 32);
  Stroke a;
  a.rev = 1;
  a.points = {{3, 3}, {20, 3}};
  session.apply({a});
  const auto snap = session.snapshot();
  EXPECT_EQ(snap.rev, 1);
  EXPECT_EQ(snap.sketch.sizes(), (std::vector<std::int64_t>{1, 32, 32}));
  EXPECT_TRUE(torch::all((snap.sketch == 0) | (snap.sketch == 1)).item<bool>());
  EXPECT_EQ(snap.sketch[0][3][10].item<float>(), 0.0F);

  session.store_frame({3, {1}});
  session.store_frame({2, {2}});
  EXPECT_EQ(session.last_frame()->rev, 3);
}

TEST(EditSession, ComponentReferenceIsRecorded) {
  EditSession session("s", 32);
  session.set_component_reference(1, Component::kMouth, torch::ones({3, 32, 32}));
  const auto snap = session.snapshot();
  ASSERT_EQ(snap.component_references.size(), 1U);
  EXPECT_TRUE(snap.component_references.contains(Component::kMouth));
}

}  // namespace
}  // namespace facedit
