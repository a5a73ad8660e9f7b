#include "facedit/appearance.hpp"

#include "facedit/errors.hpp"
#include "facedit/nn_blocks.hpp"

namespace facedit {

torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& gamma, const torch::Tensor& beta,
                    double eps) {
  if (x.dim() != 4) throw ShapeError("adain expects N x C x H x W content");
  if (x.size(2) * x.size(3) < 2) {
    throw InvalidInput("adain: channel with a single spatial element has degenerate variance");
  }
  const auto c = x.size(1);
  auto expand = [&](const torch::Tensor& p, const char* name) {
    if (p.size(-1) != c || p.dim() > 2) {
      throw ShapeError(std::string("adain: ") + name + " length does not match channel count");
    }
    return p.dim() == 1 ? p.view({1, c, 1, 1}) : p.view({p.size(0), c, 1, 1});
  };
  const auto mean = x.mean({2, 3}, /*keepdim=*/true);
  const auto std = (x - mean).pow(2).mean({2, 3}, true).sqrt();
  return expand(gamma, "gamma") * (x - mean) / (std + eps) + expand(beta, "beta");
}

AppearanceEncoderImpl::AppearanceEncoderImpl(const AppearanceEncoderOptions& opts) : opts_(opts) {
  torch::nn::Sequential seq;
  int in = 3;
  int width = opts.base_channels;
  seq->push_back(nn::conv(in, width, 3));
  seq->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
  for (int i = 0; i < opts.down_stages; ++i) {
    const int out = std::min(width * 2, opts.out_channels);
    seq->push_back(nn::conv(width, out, 4, 2, 1));
    seq->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
    width = out;
  }
  seq->push_back(nn::conv(width, opts.out_channels, 1));
  body_ = register_module("body", seq);
  nn::init_weights(*this);
}

torch::Tensor AppearanceEncoderImpl::pre_pool(const torch::Tensor& image) {
  if (image.dim() != 4 || image.size(1) != 3) {
    throw ShapeError("appearance encoder expects N x 3 x H x W");
  }
  return body_->forward(image);
}

AdainHeadImpl::AdainHeadImpl(int appearance_channels, int channels)
    : linear(register_module("linear", torch::nn::Linear(appearance_channels, 2 * channels))),
      channels_(channels) {}

std::pair<torch::Tensor, torch::Tensor> AdainHeadImpl::forward(const torch::Tensor& code) {
  auto p = linear(code);
  return {p.narrow(1, 0, channels_), p.narrow(1, channels_, channels_)};
}

SynthesisGeneratorImpl::SynthesisGeneratorImpl(const SynthesisGeneratorOptions& opts)
    : opts_(opts) {
  if (opts.up_channels.empty()) throw ConfigError("generator needs at least one up stage");
  const int c = opts.latent_channels;
  for (int i = 0; i < opts.res_blocks; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto name = "res" + std::to_string(i) + "_conv" + std::to_string(j);
      res_convs_.push_back(register_module(name, nn::conv(c, c, 3)));
      heads_.push_back(register_module(name + "_adain", AdainHead(opts.appearance_channels, c)));
    }
  }
  int in = c;
  for (std::size_t i = 0; i < opts.up_channels.size(); ++i) {
    const int out = opts.up_channels[i];
    const auto name = "up" + std::to_string(i);
    up_convs_.push_back(register_module(name + "_conv", nn::conv(in, out, 3)));
    heads_.push_back(register_module(name + "_adain", AdainHead(opts.appearance_channels, out)));
    in = out;
  }
  rgb_ = register_module("to_rgb", nn::conv(in, opts.out_channels, 3));
  nn::init_weights(*this);
  torch::NoGradGuard no_grad;
  for (auto& h : heads_) {
    h->linear->bias.narrow(0, 0, h->channels()).fill_(1.0);
  }
}

torch::Tensor SynthesisGeneratorImpl::site(std::size_t i, const torch::Tensor& x,
                                           const torch::Tensor& code) {
  auto [gamma, beta] = heads_[i]->forward(code);
  return adain(x, gamma, beta);
}

torch::Tensor SynthesisGeneratorImpl::embed(const torch::Tensor& geometry,
                                            const torch::Tensor& appearance) {
  if (geometry.dim() != 4 || geometry.size(1) != opts_.latent_channels) {
    throw ShapeError("generator expects N x " + std::to_string(opts_.latent_channels) +
                     " x h x w geometry");
  }
  if (appearance.dim() != 2 || appearance.size(1) != opts_.appearance_channels ||
      appearance.size(0) != geometry.size(0)) {
    throw ShapeError("generator expects N x " + std::to_string(opts_.appearance_channels) +
                     " appearance codes matching the geometry batch");
  }
  torch::Tensor h = geometry;
  std::size_t s = 0;
  for (int i = 0; i < opts_.res_blocks; ++i) {
    auto r = torch::relu(site(s, res_convs_[s](h), appearance));
    ++s;
    r = site(s, res_convs_[s](r), appearance);
    ++s;
    h = h + r;
  }
  for (std::size_t i = 0; i < up_convs_.size(); ++i, ++s) {
    h = torch::relu(site(s, up_convs_[i](nn::upsample2x(h)), appearance));
  }
  return h;
}

torch::Tensor SynthesisGeneratorImpl::to_rgb(const torch::Tensor& embedding) {
  return nn::unit_tanh(rgb_(embedding));
}

}  // namespace facedit
