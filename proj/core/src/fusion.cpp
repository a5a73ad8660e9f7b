#include "facedit/fusion.hpp"

#include "facedit/errors.hpp"
#include "facedit/nn_blocks.hpp"
#include "facedit/raster.hpp"

namespace facedit {

FeatureCanvas assemble_feature_canvas(const torch::Tensor& background,
                                      const std::map<Component, torch::Tensor>& features,
                                      const ComponentLayout& layout) {
  if (background.dim() != 4 || background.size(2) != layout.canvas() ||
      background.size(3) != layout.canvas()) {
    throw ShapeError("background feature must be N x C x " + std::to_string(layout.canvas()) +
                     " x " + std::to_string(layout.canvas()));
  }
  FeatureCanvas out;
  out.data = background.clone();
  out.provenance = torch::full({layout.canvas(), layout.canvas()},
                               static_cast<int>(Component::kBackground), torch::kUInt8);
  for (Component c : kFusionOrder) {
    const auto it = features.find(c);
    if (it == features.end()) continue;
    const auto& f = it->second;
    const auto& w = layout.window(c);
    if (f.dim() != 4 || f.size(0) != background.size(0) || f.size(1) != background.size(1) ||
        f.size(2) != w.h || f.size(3) != w.w) {
      throw ShapeError(std::string(component_name(c)) + " feature does not match its window");
    }
    paste(out.data, f, w);
    out.provenance.narrow(0, w.y, w.h).narrow(1, w.x, w.w).fill_(static_cast<int>(c));
  }
  return out;
}

FusionNetImpl::FusionNetImpl(const FusionNetOptions& opts) : opts_(opts) {
  torch::nn::Sequential seq;
  int width = opts.base_channels;
  seq->push_back(nn::conv(opts.in_channels, width, 3));
  seq->push_back(nn::instance_norm(width));
  seq->push_back(torch::nn::ReLU());
  for (int i = 0; i < opts.down_stages; ++i) {
    seq->push_back(nn::conv(width, width * 2, 3, 2, 1));
    seq->push_back(nn::instance_norm(width * 2));
    seq->push_back(torch::nn::ReLU());
    width *= 2;
  }
  for (int i = 0; i < opts.res_blocks; ++i) seq->push_back(nn::ResidualBlock(width));
  for (int i = 0; i < opts.down_stages; ++i) {
    seq->push_back(nn::UpBlock(width, width / 2));
    width /= 2;
  }
  seq->push_back(nn::conv(width, opts.out_channels, 3));
  body_ = register_module("body", seq);
  nn::init_weights(*this);
}

torch::Tensor FusionNetImpl::forward(const torch::Tensor& canvas) {
  const int stride = 1 << opts_.down_stages;
  if (canvas.dim() != 4 || canvas.size(1) != opts_.in_channels || canvas.size(2) % stride != 0 ||
      canvas.size(3) % stride != 0) {
    throw ShapeError("fusion net expects N x " + std::to_string(opts_.in_channels) +
                     " x H x W with H, W multiples of " + std::to_string(stride));
  }
  return nn::unit_tanh(body_->forward(canvas));
}

}  // namespace facedit
