#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <torch/torch.h>

#include "facedit/config.hpp"

namespace facedit {

// ---- colour ---------------------------------------------------------------

/// sRGB in [0,1] -> CIE-LAB (D65 white), N x 3 x H x W in both directions.
torch::Tensor rgb_to_lab(const torch::Tensor& rgb);
torch::Tensor lab_to_rgb(const torch::Tensor& lab);

/// Mean absolute difference over the a and b channels of CIE-LAB.
torch::Tensor lab_color_loss(const torch::Tensor& a, const torch::Tensor& b);

// ---- perceptual -----------------------------------------------------------

struct PerceptualOptions {
  int base_channels = 16;
  std::array<double, 5> tap_weights = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0};
};

/// VGG-style five-block feature extractor with frozen parameters. Inputs are
/// RGB in [0,1]; ImageNet normalization is applied internally.
class PerceptualExtractorImpl : public torch::nn::Module {
 public:
  explicit PerceptualExtractorImpl(const PerceptualOptions& opts = {});

  /// Fixed-seed random weights (He-normal), independent of the global RNG.
  static std::shared_ptr<PerceptualExtractorImpl> random(std::uint64_t seed,
                                                         const PerceptualOptions& opts = {});

  std::vector<torch::Tensor> taps(const torch::Tensor& rgb);
  [[nodiscard]] const PerceptualOptions& options() const { return opts_; }

 private:
  PerceptualOptions opts_;
  std::vector<torch::nn::Sequential> blocks_;
};
TORCH_MODULE(PerceptualExtractor);

/// Weighted sum over taps of the mean absolute feature gap.
torch::Tensor perceptual_loss(const torch::Tensor& a, const torch::Tensor& b,
                              PerceptualExtractor& extractor);

/// Random extractor from `cfg.perceptual_seed`, or the blob at
/// `cfg.perceptual_weights` when set (ConfigError if unreadable).
PerceptualExtractor make_perceptual_extractor(const RunConfig& cfg);

// ---- discriminator --------------------------------------------------------

struct DiscriminatorOptions {
  int in_channels = 3;
  int base_channels = 16;
  int scales = 2;
  int down_layers = 3;
  bool instance_norm = true;
};

struct ScaleOutput {
  std::vector<torch::Tensor> features;
  torch::Tensor logits;
};

class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit PatchDiscriminatorImpl(const DiscriminatorOptions& opts);
  ScaleOutput forward(const torch::Tensor& x);

 private:
  std::vector<torch::nn::Sequential> layers_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

/// K patch discriminators; scale k sees the input average-pooled k times by 2.
class MultiScaleDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiScaleDiscriminatorImpl(const DiscriminatorOptions& opts);
  std::vector<ScaleOutput> forward(const torch::Tensor& x);
  [[nodiscard]] int scales() const { return static_cast<int>(nets_.size()); }
  [[nodiscard]] const DiscriminatorOptions& options() const { return opts_; }

 private:
  DiscriminatorOptions opts_;
  std::vector<PatchDiscriminator> nets_;
};
TORCH_MODULE(MultiScaleDiscriminator);

torch::Tensor downsample2x(const torch::Tensor& x);

/// Mean over scales and taps of the mean absolute feature gap; real features
/// are detached.
torch::Tensor feature_matching_loss(const std::vector<ScaleOutput>& real,
                                    const std::vector<ScaleOutput>& fake);
torch::Tensor feature_matching_loss(MultiScaleDiscriminator& disc, const torch::Tensor& real,
                                    const torch::Tensor& fake);

/// Mean over scales of mean((logits - target)^2).
torch::Tensor least_squares_term(const std::vector<ScaleOutput>& outputs, double target);

// ---- objective algebra ----------------------------------------------------

/// alpha1 * lab + alpha2 * fm + alpha3 * vgg.
torch::Tensor reconstruction_loss(const torch::Tensor& lab, const torch::Tensor& fm,
                                  const torch::Tensor& vgg, const LossWeights& w);

/// Three-term reconstruction of `target` by `output`. The cycle loss is the same
/// quantity on (I_2, I_2').
struct ReconstructionTerms {
  torch::Tensor lab, fm, vgg, total;
};
ReconstructionTerms reconstruction_terms(const torch::Tensor& target, const torch::Tensor& output,
                                         MultiScaleDiscriminator& disc,
                                         PerceptualExtractor& extractor, const LossWeights& w);

/// L1 between image-geometry latents. `encoder` is any module mapping images
/// to latents; its parameters are not updated here.
template <typename Encoder>
torch::Tensor geometry_loss(Encoder& image_encoder, const torch::Tensor& i1,
                            const torch::Tensor& swapped) {
  return (image_encoder->forward(i1) - image_encoder->forward(swapped)).abs().mean();
}

/// tau1 * geo + tau2 * cycle.
torch::Tensor swap_loss(const torch::Tensor& geo, const torch::Tensor& cycle, const LossWeights& w);

/// The five rasters seen by the adversarial objective.
struct AdversarialInputs {
  torch::Tensor real1;  // photo of I_1
  torch::Tensor real2;  // I_2
  torch::Tensor fake1;  // I_1'
  torch::Tensor fake2;  // I_2'
  torch::Tensor swap;   // I'
};

/// Least-squares surrogate. Discriminator: gamma1,2 pull real logits to 1,
/// gamma3..5 pull fake logits (detached) to 0. Generator: gamma3..5 pull
/// fake logits to 1.
torch::Tensor discriminator_objective(MultiScaleDiscriminator& disc, const AdversarialInputs& in,
                                      const LossWeights& w);
torch::Tensor generator_objective(MultiScaleDiscriminator& disc, const AdversarialInputs& in,
                                  const LossWeights& w);

/// recon + swap + gan.
torch::Tensor total_ld_loss(const torch::Tensor& recon, const torch::Tensor& swap,
                            const torch::Tensor& gan);

}  // namespace facedit
