#include <gtest/gtest.h>

#include "facedit/engine.hpp"
#include "facedit/errors.hpp"
#include "facedit/raster.hpp"
#include "facedit/sketch.hpp"
#include "facedit/synthetic_faces.hpp"
#include "support.hpp"

namespace facedit {
namespace {

class EngineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto cfg = testing::tiny_config();
    LocalModules modules;
    for (Component c : kAllComponents) modules.emplace(c, make_local_module(cfg, c));
    engine_ = new Engine(cfg, std::move(modules), FusionNet(fusion_options(cfg)),
                         MultiScaleDiscriminator(discriminator_options(cfg)));
  }
  static void TearDownTestSuite() {
    delete engine_;
    engine_ = nullptr;
  }

  static Engine* engine_;
  torch::Tensor a_ = mat_to_tensor(render_synthetic_face(1, 0));
  torch::Tensor b_ = mat_to_tensor(render_synthetic_face(1, 1));
};

Engine* EngineTest::engine_ = nullptr;

TEST_F(EngineTest, DisentangleCoversAllComponents) {
  const auto codes = engine_->disentangle(a_);
  EXPECT_EQ(codes.geometry.size(), 5U);
  EXPECT_EQ(codes.appearance.size(), 5U);
  for (Component c : kAllComponents) {
    EXPECT_EQ(codes.geometry.at(c).component, c);
    EXPECT_EQ(codes.geometry.at(c).source, GeometrySource::kImage);
    EXPECT_EQ(codes.appearance.at(c).data.size(1), engine_->config().net.appearance_channels);
  }
  const auto again = engine_->disentangle(a_);
  for (Component c : kAllComponents) {
    EXPECT_TRUE(torch::equal(codes.geometry.at(c).data, again.geometry.at(c).data));
  }
}

TEST_F(EngineTest, GenerateIsDeterministicAndSized) {
  const auto sketch = extract_sketch(a_);
  const auto x = engine_->generate(sketch, a_);
  EXPECT_EQ(x.sizes(), (std::vector<std::int64_t>{3, 128, 128}));
  EXPECT_EQ(encode_png(x), encode_png(engine_->generate(sketch, a_)));
  EXPECT_FALSE(torch::equal(x, engine_->generate(sketch, b_)));
}

TEST_F(EngineTest, GenerationDoesNotMutateParameters) {
  const auto sketch = extract_sketch(a_);
  const auto codes_before = engine_->disentangle(b_);
  engine_->generate(sketch, a_);
  engine_->morph(a_, b_, 0.3, 0.6);
  const auto codes_after = engine_->disentangle(b_);
  for (Component c : kAllComponents) {
    EXPECT_TRUE(torch::equal(codes_before.appearance.at(c).data, codes_after.appearance.at(c).data));
  }
}

TEST_F(EngineTest, MorphEndpointsAreReconstructions) {
  EXPECT_TRUE(torch::equal(engine_->morph(a_, b_, 0, 0), engine_->reconstruct(a_)));
  EXPECT_TRUE(torch::equal(engine_->morph(a_, b_, 1, 1), engine_->reconstruct(b_)));
  EXPECT_THROW(engine_->morph(a_, b_, -0.1, 0), InvalidInput);
}

TEST_F(EngineTest, AppearanceSweepKeepsGeometryCodes) {
  const auto ca = engine_->disentangle(a_);
  const auto cb = engine_->disentangle(b_);
  const auto first = lerp_codes(ca, cb, 0.4, 0.0);
  for (int i = 1; i <= 4; ++i) {
    const auto step = lerp_codes(ca, cb, 0.4, i / 4.0);
    for (Component c : kAllComponents) {
      EXPECT_TRUE(torch::equal(step.geometry.at(c).data, first.geometry.at(c).data));
    }
  }
}

TEST_F(EngineTest, MorphGridShape) {
  const auto grid = engine_->morph_grid(a_, b_, 2, 3);
  EXPECT_EQ(grid.sizes(), (std::vector<std::int64_t>{3, 2 * 128, 3 * 128}));
}

TEST_F(EngineTest, ComponentAppearanceEditIsLocal) {
  const auto codes = engine_->disentangle(a_);
  const auto edited = engine_->with_component_appearance(codes, Component::kMouth, b_);
  for (Component c : kAllComponents) {
    EXPECT_TRUE(torch::equal(edited.geometry.at(c).data, codes.geometry.at(c).data));
    if (c != Component::kMouth) {
      EXPECT_TRUE(torch::equal(edited.appearance.at(c).data, codes.appearance.at(c).data));
    }
  }
  EXPECT_FALSE(torch::equal(edited.appearance.at(Component::kMouth).data,
                            codes.appearance.at(Component::kMouth).data));
  const auto self = engine_->with_component_appearance(codes, Component::kMouth, a_);
  EXPECT_TRUE(torch::equal(engine_->render(self), engine_->render(codes)));
}

}  // namespace
}  // namespace facedit
