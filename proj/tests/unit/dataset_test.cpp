#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "facedit/dataset.hpp"
#include "facedit/errors.hpp"
#include "facedit/raster.hpp"
#include "facedit/sketch.hpp"
#include "facedit/synthetic_faces.hpp"
#include "support.hpp"

namespace facedit {
namespace {

using testing::TempDir;

torch::Tensor step_image(int side, int column) {
  auto img = torch::zeros({3, side, side});
  img.index_put_({torch::indexing::Slice(), torch::indexing::Slice(),
                  torch::indexing::Slice(column, torch::indexing::None)},
                 1.0);
  return img;
}

TEST(ExtractSketch, UniformGrayHasNoStrokes) {
  const auto sketch = extract_sketch(torch::full({3, 128, 128}, 0.5));
  EXPECT_EQ(sketch.sizes(), (std::vector<std::int64_t>{1, 128, 128}));
  EXPECT_TRUE(torch::all(sketch == 1.0).item<bool>());
}

TEST(ExtractSketch, StepImageGivesOneStrokeAtTheStep) {
  const int side = 128;
  const int column = 64;
  const auto img = step_image(side, column);
  // Oracle: the column of maximal horizontal gradient magnitude in each row.
  const auto luma = img[0];
  const auto grad = (luma.narrow(1, 1, side - 1) - luma.narrow(1, 0, side - 1)).abs();
  const auto oracle = grad.argmax(1);  // edge lies between oracle and oracle + 1

  const auto sketch = extract_sketch(img)[0];
  const auto strokes = (sketch < 0.5).nonzero();
  ASSERT_GT(strokes.size(0), 0);
  for (std::int64_t i = 0; i < strokes.size(0); ++i) {
    const auto r = strokes[i][0].item<std::int64_t>();
    const auto c = strokes[i][1].item<std::int64_t>();
    const auto edge = oracle[r].item<std::int64_t>();
    EXPECT_LE(c, edge + 2) << "row " << r;
    EXPECT_GE(c, edge - 2) << "row " << r;
  }
  // One stroke per interior row.
  for (int r = 8; r < side - 8; ++r) {
    EXPECT_TRUE(torch::any(sketch[r] < 0.5).item<bool>()) << "row " << r;
  }
}

TEST(ExtractSketch, OutputIsBinaryAndDeterministic) {
  const auto face = mat_to_tensor(render_synthetic_face(3, 1));
  const auto a = extract_sketch(face);
  const auto b = extract_sketch(face);
  EXPECT_TRUE(torch::equal(a, b));
  EXPECT_TRUE(torch::all((a == 0) | (a == 1)).item<bool>());
}

TEST(ExtractSketch, DependsOnlyOnLuminance) {
  const auto face = mat_to_tensor(render_synthetic_face(5, 2));
  const auto luma = luminance(face);
  // Shift chroma while keeping Rec.601 luma fixed: +d on R, compensating on B.
  const double d = 0.05;
  auto recolored = face.clone();
  recolored[0] += d;
  recolored[2] -= d * 0.299 / 0.114;
  ASSERT_LT((luminance(recolored) - luma).abs().max().item<double>(), 1e-5);
  EXPECT_TRUE(torch::equal(extract_sketch_from_luminance(luma), extract_sketch(face)));
  EXPECT_TRUE(torch::equal(extract_sketch(recolored), extract_sketch(face)));
}

TEST(ExtractSketch, RejectsSmallImages) {
  EXPECT_THROW(extract_sketch(torch::full({3, 32, 32}, 0.5)), InvalidInput);
}

TEST(ExtractSketch, PortraitStrokeFractionAt512) {
  SyntheticFaceOptions opts;
  opts.side = 512;
  for (int i = 0; i < 20; ++i) {
    const auto sketch = extract_sketch(mat_to_tensor(render_synthetic_face(11, i, opts)));
    const double f = stroke_fraction(sketch);
    EXPECT_GE(f, 0.02) << "face " << i;
    EXPECT_LE(f, 0.20) << "face " << i;
  }
}

TEST(CropComponents, FullWindowIsIdentity) {
  const auto raster = testing::rand_double({3, 128, 128}, 1).to(torch::kFloat32);
  const auto layout = ComponentLayout::make_default(128, 16);
  const auto crops = crop_components(raster, layout);
  EXPECT_TRUE(torch::equal(crops.at(Component::kBackground), raster));
}

TEST(CropComponents, SubWindowIsDirectIndexing) {
  const auto raster = torch::arange(16, torch::kFloat32).view({1, 4, 4});
  const auto block = crop(raster, Window{1, 1, 2, 2});
  const auto expected = torch::tensor({5.0F, 6.0F, 9.0F, 10.0F}).view({1, 2, 2});
  EXPECT_TRUE(torch::equal(block, expected));
}

TEST(CropComponents, CropThenPasteRestoresRaster) {
  const auto raster = testing::rand_double({3, 128, 128}, 2).to(torch::kFloat32);
  const auto layout = ComponentLayout::make_default(128, 16);
  const auto crops = crop_components(raster, layout);
  EXPECT_TRUE(torch::equal(paste_components(crops, layout), raster));

  auto canvas = torch::zeros_like(raster);
  const auto& w = layout.window(Component::kNose);
  paste(canvas, crops.at(Component::kNose), w);
  EXPECT_TRUE(torch::equal(crop(canvas, w), crop(raster, w)));
}

TEST(CropComponents, OutOfBoundsWindowIsAConfigError) {
  std::array<Window, 5> windows{};
  for (auto& w : windows) w = Window{0, 0, 16, 16};
  windows[static_cast<int>(Component::kBackground)] = Window{0, 0, 64, 64};
  windows[static_cast<int>(Component::kMouth)] = Window{56, 56, 16, 16};
  EXPECT_THROW(ComponentLayout(64, windows), ConfigError);
}

class BuildDatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticFaceOptions opts;
    opts.side = 64;
    write_synthetic_faces(tmp_ / "raw", 100, 21, opts);
    cfg_.resolution = 64;
    cfg_.split_fraction = 0.93;
  }

  static std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  TempDir tmp_{"dataset"};
  RunConfig cfg_ = RunConfig::desk();
};

TEST_F(BuildDatasetTest, SplitCountsFollowFraction) {
  const auto m = build_dataset(tmp_ / "raw", tmp_ / "out", BuildOptions{cfg_});
  EXPECT_EQ(m.count(Split::kTrain), 93U);
  EXPECT_EQ(m.count(Split::kTest), 7U);

  const auto loaded = DatasetManifest::load(tmp_ / "out");
  EXPECT_EQ(loaded.entries(), m.entries());
  EXPECT_EQ(loaded.resolution(), 64);
  for (const auto& e : loaded.entries()) {
    EXPECT_TRUE(std::filesystem::exists(tmp_ / "out" / e.image));
    EXPECT_TRUE(std::filesystem::exists(tmp_ / "out" / e.sketch));
  }
  const PairStore train(loaded, Split::kTrain);
  EXPECT_EQ(train.size(), 93);
  EXPECT_NO_THROW(train.pair(0).validate(64));
}

TEST_F(BuildDatasetTest, RebuildIsByteIdentical) {
  build_dataset(tmp_ / "raw", tmp_ / "a", BuildOptions{cfg_});
  build_dataset(tmp_ / "raw", tmp_ / "b", BuildOptions{cfg_});
  EXPECT_EQ(slurp(tmp_ / "a" / DatasetManifest::kManifestFile),
            slurp(tmp_ / "b" / DatasetManifest::kManifestFile));
}

TEST_F(BuildDatasetTest, UnreadableImagesAreSkipped) {
  std::ofstream(tmp_ / "raw" / "broken.png") << "not a png";
  const auto m = build_dataset(tmp_ / "raw", tmp_ / "out", BuildOptions{cfg_});
  EXPECT_EQ(m.entries().size(), 100U);
}

TEST_F(BuildDatasetTest, EmptyDirectoryFails) {
  std::filesystem::create_directories(tmp_ / "empty");
  EXPECT_THROW(build_dataset(tmp_ / "empty", tmp_ / "out", BuildOptions{cfg_}), InvalidInput);
}

TEST(AssignSplits, RespectsFractionWithinOneEntry) {
  for (int n : {1, 7, 50, 333}) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
    for (double f : {0.1, 0.5, 0.9286}) {
      const auto splits = assign_splits(ids, f, 4);
      const auto train = std::count_if(splits.begin(), splits.end(),
                                       [](const auto& kv) { return kv.second == Split::kTrain; });
      EXPECT_LE(std::abs(static_cast<double>(train) - f * n), 1.0) << n << " " << f;
    }
  }
}

TEST(AssignSplits, PaperScaleCounts) {
  std::vector<std::string> ids;
  for (int i = 0; i < 32200; ++i) ids.push_back(std::to_string(i));
  const auto splits = assign_splits(ids, 29.9 / 32.2, 7);
  const auto train = std::count_if(splits.begin(), splits.end(),
                                   [](const auto& kv) { return kv.second == Split::kTrain; });
  EXPECT_EQ(train, 29900);
}

}  // namespace
}  // namespace facedit
