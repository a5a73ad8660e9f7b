#include "facedit/geometry.hpp"

#include <algorithm>

#include "facedit/errors.hpp"
#include "facedit/nn_blocks.hpp"

namespace facedit {

std::vector<int> encoder_widths(int base, int down_stages, int latent_channels) {
  std::vector<int> w{base};
  for (int i = 1; i <= down_stages; ++i) w.push_back(std::min(base << i, latent_channels));
  return w;
}

GeometryEncoderImpl::GeometryEncoderImpl(const GeometryEncoderOptions& opts) : opts_(opts) {
  const auto widths = encoder_widths(opts.base_channels, opts.down_stages, opts.latent_channels);
  torch::nn::Sequential seq;
  seq->push_back(nn::conv(opts.in_channels, widths[0], 3));
  seq->push_back(nn::instance_norm(widths[0]));
  seq->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
  for (int i = 1; i <= opts.down_stages; ++i) {
    seq->push_back(nn::conv(widths[i - 1], widths[i], 4, 2, 1));
    seq->push_back(nn::instance_norm(widths[i]));
    seq->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
  }
  seq->push_back(nn::conv(widths.back(), opts.latent_channels, 3));
  body_ = register_module("body", seq);
  nn::init_weights(*this);
}

torch::Tensor GeometryEncoderImpl::forward(const torch::Tensor& x) {
  const int stride = 1 << opts_.down_stages;
  if (x.dim() != 4 || x.size(1) != opts_.in_channels || x.size(2) % stride != 0 ||
      x.size(3) % stride != 0) {
    throw ShapeError("geometry encoder expects N x " + std::to_string(opts_.in_channels) +
                     " x H x W with H, W multiples of " + std::to_string(stride));
  }
  return body_->forward(x);
}

SketchDecoderImpl::SketchDecoderImpl(const SketchDecoderOptions& opts) : opts_(opts) {
  const int c = opts.latent_channels;
  for (int i = 0; i < opts.res_blocks; ++i) {
    stages_.emplace_back(register_module("res" + std::to_string(i), nn::ResidualBlock(c)));
  }
  int in = c;
  for (int i = 1; i <= opts.up_stages; ++i) {
    const int out = std::max(c >> i, 8);
    stages_.emplace_back(register_module("up" + std::to_string(i), nn::UpBlock(in, out)));
    in = out;
  }
  to_sketch_ = register_module("to_sketch", nn::conv(in, opts.out_channels, 3));
  nn::init_weights(*this);
}

std::vector<torch::Tensor> SketchDecoderImpl::taps(const torch::Tensor& latent) {
  if (latent.dim() != 4 || latent.size(1) != opts_.latent_channels) {
    throw ShapeError("sketch decoder expects N x " + std::to_string(opts_.latent_channels) +
                     " x h x w latents");
  }
  std::vector<torch::Tensor> out;
  out.reserve(stages_.size() + 1);
  out.push_back(latent);
  torch::Tensor h = latent;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    h = stages_[i].forward(h);
    if (i + 1 == stages_.size()) {
      out.push_back(nn::unit_tanh(to_sketch_(h)));
    } else {
      out.push_back(h);
    }
  }
  return out;
}

torch::Tensor SketchDecoderImpl::tap(const torch::Tensor& latent, int index) {
  if (index < 0 || index > layers()) {
    throw std::out_of_range("decoder tap " + std::to_string(index) + " outside 0.." +
                            std::to_string(layers()));
  }
  if (index == 0) return latent;
  torch::Tensor h = latent;
  for (int i = 0; i < index; ++i) h = stages_[static_cast<std::size_t>(i)].forward(h);
  return index == layers() ? nn::unit_tanh(to_sketch_(h)) : h;
}

std::vector<torch::Tensor> alignment_terms(const torch::Tensor& image_latent,
                                           const torch::Tensor& sketch_latent,
                                           SketchDecoder& decoder) {
  if (!image_latent.sizes().equals(sketch_latent.sizes())) {
    throw ShapeError("alignment loss: latent shapes differ");
  }
  const auto a = decoder->taps(image_latent);
  const auto b = decoder->taps(sketch_latent);
  std::vector<torch::Tensor> terms;
  terms.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) terms.push_back((a[i] - b[i]).abs().mean());
  return terms;
}

torch::Tensor alignment_loss(const torch::Tensor& image_latent, const torch::Tensor& sketch_latent,
                             SketchDecoder& decoder) {
  const auto terms = alignment_terms(image_latent, sketch_latent, decoder);
  return torch::stack(terms).sum();
}

}  // namespace facedit
