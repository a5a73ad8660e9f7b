#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "facedit/dataset.hpp"
#include "facedit/engine.hpp"
#include "facedit/errors.hpp"
#include "facedit/param_io.hpp"
#include "facedit/synthetic_faces.hpp"
#include "facedit/training.hpp"
#include "facedit/training_log.hpp"
#include "support.hpp"

namespace facedit {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TrainingTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new TempDir("train-data");
    write_synthetic_faces(*data_ / "raw", 6, 3);
    auto cfg = testing::tiny_config();
    cfg.split_fraction = 0.67;
    build_dataset(*data_ / "raw", *data_ / "ds", BuildOptions{cfg});
  }
  static void TearDownTestSuite() {
    delete data_;
    data_ = nullptr;
  }

  TrainContext open(const RunConfig& cfg, const std::string& run, bool resume = false) {
    return open_training(cfg, *data_ / "ds", tmp_ / run, resume);
  }

  static std::filesystem::path dataset() { return *data_ / "ds"; }

  static TempDir* data_;
  TempDir tmp_{"train"};
  RunConfig cfg_ = [] {
    auto c = testing::tiny_config();
    c.split_fraction = 0.67;
    return c;
  }();
};

TempDir* TrainingTest::data_ = nullptr;

TEST_F(TrainingTest, StageOrderIsEnforced) {
  const RunPaths paths(tmp_ / "run");
  EXPECT_THROW(require_prerequisites(paths, cfg_, Stage::kLd), StageOrderError);
  EXPECT_THROW(require_prerequisites(paths, cfg_, Stage::kAlign), StageOrderError);
  EXPECT_NO_THROW(require_prerequisites(paths, cfg_, Stage::kSketchAe));
}

TEST_F(TrainingTest, FullPipelineKeepsFrozenStagesAndLoads) {
  auto ctx = open(cfg_, "run");
  for (Component c : kAllComponents) {
    const auto ae = train_sketch_autoencoder(ctx, c);
    EXPECT_EQ(ae.end_iteration, 2);
    EXPECT_TRUE(ae.metrics.contains("train_l1"));
  }
  EXPECT_THROW(require_prerequisites(ctx.paths, cfg_, Stage::kLd), StageOrderError);
  for (Component c : kAllComponents) {
    const auto r = train_image_alignment(ctx, c);
    EXPECT_EQ(r.frozen_before, r.frozen_after);
    EXPECT_EQ(r.frozen_before.size(), 2U);
  }
  const auto ld = train_all_components(ctx);
  ASSERT_EQ(ld.size(), 5U);
  std::set<std::string> owners;
  for (const auto& r : ld) {
    owners.insert(r.owner);
    EXPECT_EQ(r.frozen_before, r.frozen_after);
    EXPECT_EQ(r.frozen_before.size(), 3U);
    write_report(ctx.paths, r);
  }
  EXPECT_EQ(owners.size(), 5U);
  const auto gf = train_gf(ctx);
  EXPECT_EQ(gf.frozen_before, gf.frozen_after);
  EXPECT_EQ(gf.frozen_before.size(), 5U * 6U);
  write_report(ctx.paths, gf);

  const auto series = read_loss_log(ctx.paths.log("mouth", Stage::kLd));
  EXPECT_EQ(series.iterations, (std::vector<int>{1, 2}));
  EXPECT_EQ(series.columns.back(), "total");
  EXPECT_TRUE(std::filesystem::exists(ctx.paths.log("fusion", Stage::kGf)));

  const auto back = read_report(ctx.paths, "fusion", Stage::kGf);
  EXPECT_EQ(back.frozen_after, gf.frozen_after);

  const auto engine = Engine::load(ctx.paths.root());
  const auto out = engine->generate(ctx.train.pair(0).sketch, ctx.train.pair(0).image);
  EXPECT_EQ(out.sizes(), (std::vector<std::int64_t>{3, 128, 128}));
}

TEST_F(TrainingTest, ZeroIterationsSavesInitialization) {
  auto cfg = cfg_;
  cfg.iterations.ae = 0;
  auto ctx = open(cfg, "zero");
  train_sketch_autoencoder(ctx, Component::kNose);
  auto init = make_local_module(cfg, Component::kNose);
  auto loaded = load_local_module(cfg, ctx.paths, Component::kNose, {Stage::kSketchAe});
  EXPECT_EQ(parameter_hash(*loaded.sketch_encoder), parameter_hash(*init.sketch_encoder));
  EXPECT_EQ(parameter_hash(*loaded.sketch_decoder), parameter_hash(*init.sketch_decoder));
}

TEST_F(TrainingTest, ResumeContinuesTheSameSequence) {
  auto cfg = cfg_;
  cfg.components = {Component::kMouth};
  cfg.iterations.ld = 4;
  {
    auto ctx = open(cfg, "straight");
    train_sketch_autoencoder(ctx, Component::kMouth);
    train_image_alignment(ctx, Component::kMouth);
    train_ld(ctx, Component::kMouth);
  }
  {
    auto part = cfg;
    part.iterations.ld = 2;
    auto ctx = open(part, "resumed");
    train_sketch_autoencoder(ctx, Component::kMouth);
    train_image_alignment(ctx, Component::kMouth);
    train_ld(ctx, Component::kMouth);
  }
  {
    auto ctx = open(cfg, "resumed", /*resume=*/true);
    const auto r = train_ld(ctx, Component::kMouth);
    EXPECT_EQ(r.start_iteration, 2);
    EXPECT_EQ(r.end_iteration, 4);
  }
  const RunPaths a(tmp_ / "straight");
  const RunPaths b(tmp_ / "resumed");
  EXPECT_EQ(slurp(a.log("mouth", Stage::kLd)), slurp(b.log("mouth", Stage::kLd)));
  EXPECT_EQ(read_loss_log(b.log("mouth", Stage::kLd)).iterations, (std::vector<int>{1, 2, 3, 4}));
}

TEST_F(TrainingTest, RerunWithSameSeedReproducesLogs) {
  auto cfg = cfg_;
  cfg.components = {Component::kLeftEye};
  for (const char* run : {"r1", "r2"}) {
    auto ctx = open(cfg, run);
    train_sketch_autoencoder(ctx, Component::kLeftEye);
    train_image_alignment(ctx, Component::kLeftEye);
    train_ld(ctx, Component::kLeftEye);
  }
  for (Stage s : {Stage::kSketchAe, Stage::kAlign, Stage::kLd}) {
    EXPECT_EQ(slurp(RunPaths(tmp_ / "r1").log("left-eye", s)),
              slurp(RunPaths(tmp_ / "r2").log("left-eye", s)));
  }
}

TEST_F(TrainingTest, ResolutionMismatchIsRejected) {
  auto cfg = cfg_;
  cfg.resolution = 256;
  EXPECT_THROW(open(cfg, "bad"), ConfigError);
}

class SwapStepTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg_ = testing::tiny_config();
    m_ = make_local_module(cfg_, Component::kNose);
    m_.eval();
    PerceptualOptions po;
    po.base_channels = 4;
    extractor_ = PerceptualExtractor(PerceptualExtractorImpl::random(1, po));
    const auto& w = m_.window;
    in_.sketch1 = (torch::rand({2, 1, w.h, w.w}) > 0.2).to(torch::kFloat32);
    in_.photo1 = torch::rand({2, 3, w.h, w.w});
    in_.photo2 = torch::rand({2, 3, w.h, w.w});
  }

  RunConfig cfg_;
  LocalModule m_;
  PerceptualExtractor extractor_{nullptr};
  SwapInputs in_;
};

TEST_F(SwapStepTest, IdenticalPairsMakeSwapEqualSelfReconstruction) {
  auto in = in_;
  in.photo2 = in.photo1;
  in.source = GeometrySource::kImage;
  const auto out = swap_step(m_, extractor_, in, cfg_.weights);
  EXPECT_TRUE(torch::equal(out.swapped, out.self_recon));
}

TEST_F(SwapStepTest, SwapDependsOnSecondImageOnlyThroughAppearance) {
  auto in = in_;
  auto other = in_;
  other.photo2 = torch::rand_like(in_.photo2);
  const auto base = swap_step(m_, extractor_, in, cfg_.weights).swapped;
  EXPECT_FALSE(torch::equal(base, swap_step(m_, extractor_, other, cfg_.weights).swapped));
  {
    torch::NoGradGuard no_grad;
    for (const auto& head : m_.generator->heads()) head->linear->weight.zero_();
  }
  EXPECT_TRUE(torch::equal(swap_step(m_, extractor_, in, cfg_.weights).swapped,
                           swap_step(m_, extractor_, other, cfg_.weights).swapped));
}

TEST_F(SwapStepTest, SecondImageMustBeAPhoto) {
  auto in = in_;
  in.photo2 = in_.sketch1;
  EXPECT_THROW(swap_step(m_, extractor_, in, cfg_.weights), InvalidInput);
}

TEST_F(SwapStepTest, TermsMatchIndependentRecomputation) {
  for (GeometrySource source : {GeometrySource::kSketch, GeometrySource::kImage}) {
    auto in = in_;
    in.source = source;
    const auto out = swap_step(m_, extractor_, in, cfg_.weights);
    const auto& t = out.terms;
    const auto& w = cfg_.weights;
    auto& d = m_.discriminator;
    const double recon = w.alpha[0] * lab_color_loss(in.photo1, out.self_recon).item<double>() +
                         w.alpha[1] * feature_matching_loss(d, in.photo1, out.self_recon).item<double>() +
                         w.alpha[2] * perceptual_loss(in.photo1, out.self_recon, extractor_).item<double>();
    const double cycle = w.alpha[0] * lab_color_loss(in.photo2, out.cycle).item<double>() +
                         w.alpha[1] * feature_matching_loss(d, in.photo2, out.cycle).item<double>() +
                         w.alpha[2] * perceptual_loss(in.photo2, out.cycle, extractor_).item<double>();
    const double geo = source == GeometrySource::kImage
                           ? geometry_loss(m_.image_encoder, in.photo1, out.swapped).item<double>()
                           : 0.0;
    AdversarialInputs adv{in.photo1, in.photo2, out.self_recon, out.cycle, out.swapped};
    const double gan = generator_objective(d, adv, w).item<double>();
    EXPECT_NEAR(t.recon.item<double>(), recon, 1e-5);
    EXPECT_NEAR(t.cycle.item<double>(), cycle, 1e-5);
    EXPECT_NEAR(t.geo.item<double>(), geo, 1e-5);
    EXPECT_NEAR(t.gan.item<double>(), gan, 1e-5);
    EXPECT_NEAR(t.total.item<double>(), recon + w.tau[0] * geo + w.tau[1] * cycle + gan, 1e-4);
  }
}

TEST(GeometryCoin, FairOverTenThousandDraws) {
  int sketches = 0;
  for (int it = 1; it <= 10000; ++it) {
    sketches += geometry_coin(7, "mouth", it) == GeometrySource::kSketch ? 1 : 0;
  }
  EXPECT_GE(sketches, 4800);
  EXPECT_LE(sketches, 5200);
  EXPECT_EQ(geometry_coin(7, "mouth", 42), geometry_coin(7, "mouth", 42));
}

TEST(EpochSampler, EveryEpochIsAPermutation) {
  EpochSampler s(10, 3);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::set<std::int64_t> seen;
    for (int i = 0; i < 10; ++i) seen.insert(s.at(epoch * 10 + i));
    EXPECT_EQ(seen.size(), 10U);
  }
  EpochSampler fresh(10, 3);
  EXPECT_EQ(fresh.at(25), s.at(25));
}

}  // namespace
}  // namespace facedit
