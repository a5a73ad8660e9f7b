#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "facedit/checkpoint.hpp"
#include "facedit/engine.hpp"
#include "facedit/errors.hpp"
#include "facedit/param_io.hpp"
#include "facedit/training_log.hpp"
#include "support.hpp"

namespace facedit {
namespace {

using testing::TempDir;

using testing::fresh_engine;

TEST(ParamBlob, RoundTripIsBitExact) {
  torch::nn::Linear a(4, 3);
  torch::nn::Linear b(4, 3);
  deserialize_parameters(*b, serialize_parameters(*a));
  EXPECT_TRUE(torch::equal(a->weight, b->weight));
  EXPECT_TRUE(torch::equal(a->bias, b->bias));
  EXPECT_EQ(parameter_hash(*a), parameter_hash(*b));
  EXPECT_EQ(serialize_parameters(*a), serialize_parameters(*b));
}

TEST(ParamBlob, MismatchLeavesModuleUntouched) {
  torch::nn::Linear a(4, 3);
  torch::nn::Linear wrong(4, 2);
  const auto before = a->weight.clone();
  TempDir tmp("blob");
  save_parameters(*wrong, tmp / "w.fdpb");
  EXPECT_THROW(load_parameters(*a, tmp / "w.fdpb"), CheckpointError);
  EXPECT_TRUE(torch::equal(a->weight, before));
  EXPECT_THROW(load_parameters(*a, tmp / "missing.fdpb"), CheckpointError);
  std::ofstream(tmp / "bad.fdpb") << "XXXX";
  EXPECT_THROW(load_parameters(*a, tmp / "bad.fdpb"), CheckpointError);
}

TEST(ParamBlob, TrainableFlag) {
  torch::nn::Linear a(2, 2);
  set_trainable(*a, false);
  for (const auto& p : a->parameters()) EXPECT_FALSE(p.requires_grad());
  set_trainable(*a, true);
  for (const auto& p : a->parameters()) EXPECT_TRUE(p.requires_grad());
}

TEST(StageCheckpoint, SaveLoadAndDigestCheck) {
  TempDir tmp("stage");
  torch::nn::Linear a(3, 3);
  torch::nn::Linear b(3, 3);
  StageMeta meta;
  meta.owner = "nose";
  meta.stage = Stage::kAlign;
  meta.iteration = 5;
  meta.target_iterations = 5;
  save_stage(tmp.path(), {{"lin", a.get()}}, meta);
  EXPECT_TRUE(stage_complete(tmp.path()));
  const auto loaded = load_stage(tmp.path(), {{"lin", b.get()}}, "nose align");
  EXPECT_EQ(loaded.iteration, 5);
  EXPECT_EQ(loaded.owner, "nose");
  EXPECT_TRUE(torch::equal(a->weight, b->weight));

  // Corrupt the blob: the digest check refuses it.
  {
    std::fstream f(tmp / "lin.fdpb", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-1, std::ios::end);
    f.put('\x7f');
  }
  torch::nn::Linear c(3, 3);
  EXPECT_THROW(load_stage(tmp.path(), {{"lin", c.get()}}, "nose align"), CheckpointError);
}

TEST(StageCheckpoint, MissingMetaNamesTheStage) {
  TempDir tmp("meta");
  try {
    read_stage_meta(tmp / "absent", "mouth ld");
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("mouth ld"), std::string::npos);
  }
}

class BundleTest : public ::testing::Test {
 protected:
  RunConfig cfg_ = testing::tiny_config();
  TempDir tmp_{"bundle"};
};

TEST_F(BundleTest, SaveLoadSaveIsHashIdentical) {
  fresh_engine(cfg_)->save(tmp_ / "a");
  const auto loaded = Engine::load(tmp_ / "a");
  loaded->save(tmp_ / "b");
  EXPECT_EQ(directory_hash(tmp_ / "a"), directory_hash(tmp_ / "b"));
}

TEST_F(BundleTest, LoadedEngineReproducesOutputs) {
  const auto engine = fresh_engine(cfg_);
  engine->save(tmp_ / "a");
  const auto loaded = Engine::load(tmp_ / "a");
  const auto img = torch::rand({3, 128, 128});
  EXPECT_TRUE(torch::equal(engine->reconstruct(img), loaded->reconstruct(img)));
}

TEST_F(BundleTest, VersionMismatchIsRefused) {
  fresh_engine(cfg_)->save(tmp_ / "a");
  nlohmann::json j;
  std::ifstream(tmp_ / "a" / "bundle.json") >> j;
  j["format_version"] = 99;
  std::ofstream(tmp_ / "a" / "bundle.json", std::ios::trunc) << j.dump();
  EXPECT_THROW(Engine::load(tmp_ / "a"), CheckpointError);
}

TEST_F(BundleTest, MissingComponentIsNamed) {
  fresh_engine(cfg_)->save(tmp_ / "a");
  std::filesystem::remove_all(tmp_ / "a" / "nose" / "ld");
  try {
    Engine::load(tmp_ / "a");
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("nose"), std::string::npos) << e.what();
  }
}

TEST(LossLog, ResumeTruncatesLaterRows) {
  TempDir tmp("log");
  const auto path = tmp / "x.csv";
  {
    LossLog log(path, {"a", "total"}, 0);
    for (int i = 1; i <= 5; ++i) log.append(i, {0.1 * i, 0.2 * i});
  }
  {
    LossLog log(path, {"a", "total"}, 3);
    log.append(4, {9.0, 9.0});
  }
  const auto series = read_loss_log(path);
  EXPECT_EQ(series.iterations, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(series.column("a").back(), 9.0);
  EXPECT_THROW(series.column("nope"), std::out_of_range);
}

TEST(LossLog, SmoothedEnds) {
  const auto ends = smoothed_ends({4, 2, 0, 0, 1, 3}, 2);
  EXPECT_EQ(ends.start, 3.0);
  EXPECT_EQ(ends.end, 2.0);
}

}  // namespace
}  // namespace facedit
