#pragma once

#include <torch/torch.h>

#include "facedit/appearance.hpp"
#include "facedit/config.hpp"
#include "facedit/geometry.hpp"
#include "facedit/losses.hpp"

namespace facedit {

/// Every network of one component's local disentanglement module.
struct LocalModule {
  Component component = Component::kBackground;
  Window window;
  GeometryEncoder sketch_encoder{nullptr};
  SketchDecoder sketch_decoder{nullptr};
  GeometryEncoder image_encoder{nullptr};
  AppearanceEncoder appearance_encoder{nullptr};
  SynthesisGenerator generator{nullptr};
  MultiScaleDiscriminator discriminator{nullptr};

  /// Spatial size of this component's geometry latent.
  [[nodiscard]] std::pair<int, int> latent_size() const;

  GeometryFeature encode_sketch(const torch::Tensor& sketch_crop);
  GeometryFeature encode_image_geometry(const torch::Tensor& image_crop);
  AppearanceFeature encode_appearance(const torch::Tensor& image_crop);
  /// Penultimate embedding. Throws InvalidInput when either code belongs to
  /// another component.
  torch::Tensor embed(const GeometryFeature& g, const AppearanceFeature& a);
  torch::Tensor synthesize(const GeometryFeature& g, const AppearanceFeature& a);

  void eval();
  void train();
};

/// Builds freshly initialized networks; initialization is seeded from
/// (cfg.seed, component) so repeated construction is bit-identical.
LocalModule make_local_module(const RunConfig& cfg, Component component);

GeometryEncoderOptions sketch_encoder_options(const RunConfig& cfg);
GeometryEncoderOptions image_encoder_options(const RunConfig& cfg);
SketchDecoderOptions sketch_decoder_options(const RunConfig& cfg);
AppearanceEncoderOptions appearance_encoder_options(const RunConfig& cfg);
SynthesisGeneratorOptions generator_options(const RunConfig& cfg);
DiscriminatorOptions discriminator_options(const RunConfig& cfg);

/// Deterministic seed derived from the run seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::string_view> tags,
                          std::int64_t counter = 0);

}  // namespace facedit
