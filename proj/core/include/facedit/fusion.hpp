#pragma once

#include <map>

#include <torch/torch.h>

#include "facedit/layout.hpp"

namespace facedit {

/// Full-face embedding canvas and, per pixel, the component whose value it holds.
struct FeatureCanvas {
  torch::Tensor data;        // N x C x H x W
  torch::Tensor provenance;  // H x W, uint8 Component value
};

/// Copies the background feature, then pastes each present component in
/// fusion order (mouth, nose, left eye, right eye); later components overwrite
/// earlier ones where windows overlap. Throws ShapeError when a feature does
/// not match its window or the background does not match the canvas.
FeatureCanvas assemble_feature_canvas(const torch::Tensor& background,
                                      const std::map<Component, torch::Tensor>& features,
                                      const ComponentLayout& layout);

struct FusionNetOptions {
  int in_channels = 64;
  int base_channels = 16;
  int down_stages = 3;
  int res_blocks = 6;
  int out_channels = 3;
};

/// Encoder (strided convs), residual blocks, decoder (upsampling convs), RGB head.
class FusionNetImpl : public torch::nn::Module {
 public:
  explicit FusionNetImpl(const FusionNetOptions& opts);
  torch::Tensor forward(const torch::Tensor& canvas);
  [[nodiscard]] const FusionNetOptions& options() const { return opts_; }

 private:
  FusionNetOptions opts_;
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(FusionNet);

}  // namespace facedit
