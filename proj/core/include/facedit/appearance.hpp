#pragma once

#include <vector>

#include <torch/torch.h>

#include "facedit/layout.hpp"

namespace facedit {

/// Per-component appearance code (batched: N x c_A), no spatial axes.
struct AppearanceFeature {
  torch::Tensor data;
  Component component = Component::kBackground;
};

inline constexpr double kAdainEpsilon = 1e-5;

/// gamma * (x - mean) / (std + eps) + beta per sample and channel, with the
/// population standard deviation over H x W. `gamma` and `beta` are N x C or C.
/// Throws InvalidInput when a channel has fewer than two spatial elements.
torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& gamma, const torch::Tensor& beta,
                    double eps = kAdainEpsilon);

struct AppearanceEncoderOptions {
  int base_channels = 16;
  int down_stages = 4;
  int out_channels = 64;
};

/// Convolutional encoder followed by global average pooling.
class AppearanceEncoderImpl : public torch::nn::Module {
 public:
  explicit AppearanceEncoderImpl(const AppearanceEncoderOptions& opts);

  /// Final convolution map before pooling, N x c_A x h x w.
  torch::Tensor pre_pool(const torch::Tensor& image);
  /// Spatial mean of a pre-pool map, N x c_A. Values are sorted before the
  /// sum, so any spatial permutation gives a bit-identical result.
  static torch::Tensor pool(const torch::Tensor& map) {
    const auto flat = std::get<0>(map.flatten(2).sort(2));
    return flat.sum(2) / static_cast<double>(flat.size(2));
  }
  torch::Tensor forward(const torch::Tensor& image) { return pool(pre_pool(image)); }

  [[nodiscard]] const AppearanceEncoderOptions& options() const { return opts_; }

 private:
  AppearanceEncoderOptions opts_;
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(AppearanceEncoder);

struct SynthesisGeneratorOptions {
  int latent_channels = 64;
  int appearance_channels = 64;
  int res_blocks = 4;
  std::vector<int> up_channels = {64, 32, 32, 64};  // last entry is the embedding width
  int out_channels = 3;
};

/// One AdaIN site: a linear map from the appearance code to (gamma, beta).
class AdainHeadImpl : public torch::nn::Module {
 public:
  AdainHeadImpl(int appearance_channels, int channels);
  /// Returns {gamma, beta}, each N x channels.
  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& code);
  [[nodiscard]] int channels() const { return channels_; }
  torch::nn::Linear linear{nullptr};

 private:
  int channels_;
};
TORCH_MODULE(AdainHead);

/// Residual and upsampling stack with AdaIN after every convolution.
/// `embed` returns the embedding before the RGB convolution.
class SynthesisGeneratorImpl : public torch::nn::Module {
 public:
  explicit SynthesisGeneratorImpl(const SynthesisGeneratorOptions& opts);

  torch::Tensor embed(const torch::Tensor& geometry, const torch::Tensor& appearance);
  torch::Tensor to_rgb(const torch::Tensor& embedding);
  torch::Tensor forward(const torch::Tensor& geometry, const torch::Tensor& appearance) {
    return to_rgb(embed(geometry, appearance));
  }

  [[nodiscard]] int embedding_channels() const { return opts_.up_channels.back(); }
  [[nodiscard]] int upsample_factor() const {
    return 1 << static_cast<int>(opts_.up_channels.size());
  }
  [[nodiscard]] const std::vector<AdainHead>& heads() const { return heads_; }
  [[nodiscard]] const SynthesisGeneratorOptions& options() const { return opts_; }

 private:
  torch::Tensor site(std::size_t i, const torch::Tensor& x, const torch::Tensor& code);

  SynthesisGeneratorOptions opts_;
  std::vector<torch::nn::Conv2d> res_convs_;  // two per residual block
  std::vector<torch::nn::Conv2d> up_convs_;
  std::vector<AdainHead> heads_;  // res sites first, then one per up block
  torch::nn::Conv2d rgb_{nullptr};
};
TORCH_MODULE(SynthesisGenerator);

}  // namespace facedit
