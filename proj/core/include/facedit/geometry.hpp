#pragma once

#include <vector>

#include <torch/torch.h>

#include "facedit/layout.hpp"

namespace facedit {

enum class GeometrySource { kSketch, kImage };

/// Spatial geometry latent of one component (batched: N x c_G x h_G x w_G).
struct GeometryFeature {
  torch::Tensor data;
  GeometrySource source = GeometrySource::kSketch;
  Component component = Component::kBackground;
};

struct GeometryEncoderOptions {
  int in_channels = 1;
  int base_channels = 8;
  int down_stages = 4;
  int latent_channels = 64;
};

/// Stride-2^down_stages convolutional encoder into the geometry latent. The same
/// architecture serves sketches (1 channel) and photos (3 channels).
class GeometryEncoderImpl : public torch::nn::Module {
 public:
  explicit GeometryEncoderImpl(const GeometryEncoderOptions& opts);
  torch::Tensor forward(const torch::Tensor& x);
  [[nodiscard]] const GeometryEncoderOptions& options() const { return opts_; }

 private:
  GeometryEncoderOptions opts_;
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(GeometryEncoder);

struct SketchDecoderOptions {
  int latent_channels = 64;
  int res_blocks = 3;
  int up_stages = 4;
  int out_channels = 1;
};

/// Sketch decoder with res_blocks + up_stages layers. Tap 0 is the input latent,
/// taps 1..N-1 the intermediate maps, tap N the output raster in [0,1].
class SketchDecoderImpl : public torch::nn::Module {
 public:
  explicit SketchDecoderImpl(const SketchDecoderOptions& opts);

  [[nodiscard]] int layers() const { return opts_.res_blocks + opts_.up_stages; }
  std::vector<torch::Tensor> taps(const torch::Tensor& latent);
  torch::Tensor tap(const torch::Tensor& latent, int index);
  torch::Tensor forward(const torch::Tensor& latent) { return tap(latent, layers()); }

  [[nodiscard]] const SketchDecoderOptions& options() const { return opts_; }

 private:
  SketchDecoderOptions opts_;
  std::vector<torch::nn::AnyModule> stages_;
  torch::nn::Conv2d to_sketch_{nullptr};
};
TORCH_MODULE(SketchDecoder);

/// Channel widths of the encoder stem and each down stage.
std::vector<int> encoder_widths(int base, int down_stages, int latent_channels);

/// Sum over decoder taps i = 0..N of the mean absolute difference between
/// D^(i)(image_latent) and D^(i)(sketch_latent). Gradients flow into
/// `image_latent` only when the decoder parameters are frozen by the caller.
torch::Tensor alignment_loss(const torch::Tensor& image_latent, const torch::Tensor& sketch_latent,
                             SketchDecoder& decoder);

/// Per-tap terms of alignment_loss, in tap order.
std::vector<torch::Tensor> alignment_terms(const torch::Tensor& image_latent,
                                           const torch::Tensor& sketch_latent,
                                           SketchDecoder& decoder);

}  // namespace facedit
