#include "facedit/losses.hpp"

#include "facedit/errors.hpp"
#include "facedit/nn_blocks.hpp"
#include "facedit/param_io.hpp"

namespace facedit {

namespace {

constexpr double kDelta = 6.0 / 29.0;
constexpr std::array<double, 3> kWhite = {0.95047, 1.0, 1.08883};

torch::Tensor srgb_to_linear(const torch::Tensor& c) {
  const auto hi = ((c.clamp_min(0.04045) + 0.055) / 1.055).pow(2.4);
  return torch::where(c <= 0.04045, c / 12.92, hi);
}

torch::Tensor linear_to_srgb(const torch::Tensor& c) {
  const auto hi = 1.055 * c.clamp_min(0.0031308).pow(1.0 / 2.4) - 0.055;
  return torch::where(c <= 0.0031308, c * 12.92, hi);
}

torch::Tensor lab_f(const torch::Tensor& t) {
  constexpr double d3 = kDelta * kDelta * kDelta;
  const auto cube_root = t.clamp_min(d3).pow(1.0 / 3.0);
  return torch::where(t > d3, cube_root, t / (3 * kDelta * kDelta) + 4.0 / 29.0);
}

torch::Tensor lab_f_inv(const torch::Tensor& f) {
  return torch::where(f > kDelta, f.pow(3), 3 * kDelta * kDelta * (f - 4.0 / 29.0));
}

// Linear sRGB -> XYZ (D65), double precision.
torch::Tensor rgb_to_xyz_matrix() {
  return torch::tensor(std::vector<double>{0.4124564, 0.3575761, 0.1804375, 0.2126729, 0.7151522,
                                           0.0721750, 0.0193339, 0.1191920, 0.9503041},
                       torch::kFloat64)
      .view({3, 3});
}

// Applies a 3x3 matrix over the channel axis of N x 3 x H x W.
torch::Tensor mix(const torch::Tensor& m, const torch::Tensor& x) {
  return torch::einsum("ij,njhw->nihw", {m, x});
}

void check_same(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (!a.sizes().equals(b.sizes())) throw ShapeError(std::string(what) + ": shapes differ");
}

torch::Tensor as_batch(const torch::Tensor& x) { return x.dim() == 3 ? x.unsqueeze(0) : x; }

}  // namespace

torch::Tensor rgb_to_lab(const torch::Tensor& rgb) {
  const auto x = as_batch(rgb);
  if (x.size(1) != 3) throw ShapeError("rgb_to_lab expects 3 channels");
  const auto m = rgb_to_xyz_matrix().to(x.options());
  const auto xyz = mix(m, srgb_to_linear(x));
  const auto fx = lab_f(xyz.select(1, 0) / kWhite[0]);
  const auto fy = lab_f(xyz.select(1, 1) / kWhite[1]);
  const auto fz = lab_f(xyz.select(1, 2) / kWhite[2]);
  return torch::stack({116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)}, 1);
}

torch::Tensor lab_to_rgb(const torch::Tensor& lab) {
  const auto x = as_batch(lab);
  const auto fy = (x.select(1, 0) + 16.0) / 116.0;
  const auto fx = fy + x.select(1, 1) / 500.0;
  const auto fz = fy - x.select(1, 2) / 200.0;
  const auto xyz = torch::stack(
      {lab_f_inv(fx) * kWhite[0], lab_f_inv(fy) * kWhite[1], lab_f_inv(fz) * kWhite[2]}, 1);
  // Exact inverse of the forward matrix so that the round trip closes.
  const auto m = torch::linalg_inv(rgb_to_xyz_matrix()).to(x.options());
  return linear_to_srgb(mix(m, xyz));
}

torch::Tensor lab_color_loss(const torch::Tensor& a, const torch::Tensor& b) {
  check_same(a, b, "lab_color_loss");
  const auto la = rgb_to_lab(a).narrow(1, 1, 2);
  const auto lb = rgb_to_lab(b).narrow(1, 1, 2);
  return (la - lb).abs().mean();
}

PerceptualExtractorImpl::PerceptualExtractorImpl(const PerceptualOptions& opts) : opts_(opts) {
  const int b = opts.base_channels;
  const std::array<int, 5> widths = {b, 2 * b, 4 * b, 8 * b, 8 * b};
  int in = 3;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    torch::nn::Sequential block;
    if (i > 0) block->push_back(torch::nn::AvgPool2d(torch::nn::AvgPool2dOptions(2)));
    block->push_back(nn::conv(in, widths[i], 3));
    block->push_back(torch::nn::ReLU());
    block->push_back(nn::conv(widths[i], widths[i], 3));
    block->push_back(torch::nn::ReLU());
    blocks_.push_back(register_module("block" + std::to_string(i), block));
    in = widths[i];
  }
  for (auto& p : parameters()) p.set_requires_grad(false);
}

std::shared_ptr<PerceptualExtractorImpl> PerceptualExtractorImpl::random(
    std::uint64_t seed, const PerceptualOptions& opts) {
  auto net = std::make_shared<PerceptualExtractorImpl>(opts);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  torch::NoGradGuard no_grad;
  for (auto& p : net->parameters()) {
    if (p.dim() == 4) {
      const double fan_in = static_cast<double>(p.size(1) * p.size(2) * p.size(3));
      p.copy_(at::normal(0.0, std::sqrt(2.0 / fan_in), p.sizes(), gen));
    } else {
      p.zero_();
    }
  }
  return net;
}

std::vector<torch::Tensor> PerceptualExtractorImpl::taps(const torch::Tensor& rgb) {
  const auto x = as_batch(rgb);
  if (x.size(1) != 3) throw ShapeError("perceptual extractor expects RGB input");
  const auto mean = torch::tensor({0.485, 0.456, 0.406}, x.options()).view({1, 3, 1, 1});
  const auto std = torch::tensor({0.229, 0.224, 0.225}, x.options()).view({1, 3, 1, 1});
  torch::Tensor h = (x - mean) / std;
  std::vector<torch::Tensor> out;
  for (auto& block : blocks_) {
    h = block->forward(h);
    out.push_back(h);
  }
  return out;
}

torch::Tensor perceptual_loss(const torch::Tensor& a, const torch::Tensor& b,
                              PerceptualExtractor& extractor) {
  check_same(a, b, "perceptual_loss");
  const auto ta = extractor->taps(a);
  const auto tb = extractor->taps(b);
  const auto& w = extractor->options().tap_weights;
  torch::Tensor total = torch::zeros({}, a.options());
  for (std::size_t i = 0; i < ta.size(); ++i) total = total + w[i] * (ta[i] - tb[i]).abs().mean();
  return total;
}

PerceptualExtractor make_perceptual_extractor(const RunConfig& cfg) {
  PerceptualOptions opts;
  opts.base_channels = cfg.net.perceptual_base;
  if (cfg.perceptual_weights.empty()) {
    return PerceptualExtractor(PerceptualExtractorImpl::random(cfg.perceptual_seed, opts));
  }
  PerceptualExtractor net(opts);
  try {
    load_parameters(*net, cfg.perceptual_weights);
  } catch (const CheckpointError& e) {
    throw ConfigError(std::string("perceptual extractor unavailable: ") + e.what());
  }
  return net;
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(const DiscriminatorOptions& opts) {
  const int b = opts.base_channels;
  auto lrelu = [] { return torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)); };
  auto add = [&](torch::nn::Sequential seq) {
    layers_.push_back(register_module("layer" + std::to_string(layers_.size()), seq));
  };
  add(torch::nn::Sequential(nn::conv(opts.in_channels, b, 4, 2, 1), lrelu()));
  int in = b;
  for (int i = 1; i < opts.down_layers; ++i) {
    const int out = std::min(b << i, 8 * b);
    torch::nn::Sequential seq(nn::conv(in, out, 4, 2, 1));
    if (opts.instance_norm) seq->push_back(nn::instance_norm(out));
    seq->push_back(lrelu());
    add(seq);
    in = out;
  }
  torch::nn::Sequential last(nn::conv(in, 8 * b, 3));
  if (opts.instance_norm) last->push_back(nn::instance_norm(8 * b));
  last->push_back(lrelu());
  add(last);
  head_ = register_module("head", nn::conv(8 * b, 1, 3));
  nn::init_weights(*this);
}

ScaleOutput PatchDiscriminatorImpl::forward(const torch::Tensor& x) {
  ScaleOutput out;
  torch::Tensor h = x;
  for (auto& layer : layers_) {
    h = layer->forward(h);
    out.features.push_back(h);
  }
  out.logits = head_(h);
  return out;
}

torch::Tensor downsample2x(const torch::Tensor& x) {
  namespace F = torch::nn::functional;
  return F::avg_pool2d(x, F::AvgPool2dFuncOptions(3).stride(2).padding(1).count_include_pad(false));
}

MultiScaleDiscriminatorImpl::MultiScaleDiscriminatorImpl(const DiscriminatorOptions& opts)
    : opts_(opts) {
  if (opts.scales < 1) throw ConfigError("discriminator needs at least one scale");
  for (int k = 0; k < opts.scales; ++k) {
    nets_.push_back(register_module("scale" + std::to_string(k), PatchDiscriminator(opts)));
  }
}

std::vector<ScaleOutput> MultiScaleDiscriminatorImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != opts_.in_channels) {
    throw ShapeError("discriminator expects N x " + std::to_string(opts_.in_channels) +
                     " x H x W");
  }
  std::vector<ScaleOutput> out;
  torch::Tensor h = x;
  for (std::size_t k = 0; k < nets_.size(); ++k) {
    if (k > 0) h = downsample2x(h);
    out.push_back(nets_[k]->forward(h));
  }
  return out;
}

torch::Tensor feature_matching_loss(const std::vector<ScaleOutput>& real,
                                    const std::vector<ScaleOutput>& fake) {
  if (real.size() != fake.size() || real.empty()) {
    throw ShapeError("feature matching: scale counts differ");
  }
  torch::Tensor total;
  int terms = 0;
  for (std::size_t k = 0; k < real.size(); ++k) {
    for (std::size_t i = 0; i < real[k].features.size(); ++i) {
      const auto gap = (real[k].features[i].detach() - fake[k].features[i]).abs().mean();
      total = total.defined() ? total + gap : gap;
      ++terms;
    }
  }
  return total / terms;
}

torch::Tensor feature_matching_loss(MultiScaleDiscriminator& disc, const torch::Tensor& real,
                                    const torch::Tensor& fake) {
  check_same(real, fake, "feature_matching_loss");
  return feature_matching_loss(disc->forward(real), disc->forward(fake));
}

torch::Tensor least_squares_term(const std::vector<ScaleOutput>& outputs, double target) {
  torch::Tensor total;
  for (const auto& o : outputs) {
    const auto t = (o.logits - target).pow(2).mean();
    total = total.defined() ? total + t : t;
  }
  return total / static_cast<double>(outputs.size());
}

torch::Tensor reconstruction_loss(const torch::Tensor& lab, const torch::Tensor& fm,
                                  const torch::Tensor& vgg, const LossWeights& w) {
  return w.alpha[0] * lab + w.alpha[1] * fm + w.alpha[2] * vgg;
}

ReconstructionTerms reconstruction_terms(const torch::Tensor& target, const torch::Tensor& output,
                                         MultiScaleDiscriminator& disc,
                                         PerceptualExtractor& extractor, const LossWeights& w) {
  ReconstructionTerms t;
  t.lab = lab_color_loss(target, output);
  t.fm = feature_matching_loss(disc, target, output);
  t.vgg = perceptual_loss(target, output, extractor);
  t.total = reconstruction_loss(t.lab, t.fm, t.vgg, w);
  return t;
}

torch::Tensor swap_loss(const torch::Tensor& geo, const torch::Tensor& cycle,
                        const LossWeights& w) {
  return w.tau[0] * geo + w.tau[1] * cycle;
}

torch::Tensor discriminator_objective(MultiScaleDiscriminator& disc, const AdversarialInputs& in,
                                      const LossWeights& w) {
  const auto& g = w.gamma;
  return g[0] * least_squares_term(disc->forward(in.real1), 1.0) +
         g[1] * least_squares_term(disc->forward(in.real2), 1.0) +
         g[2] * least_squares_term(disc->forward(in.fake1.detach()), 0.0) +
         g[3] * least_squares_term(disc->forward(in.fake2.detach()), 0.0) +
         g[4] * least_squares_term(disc->forward(in.swap.detach()), 0.0);
}

torch::Tensor generator_objective(MultiScaleDiscriminator& disc, const AdversarialInputs& in,
                                  const LossWeights& w) {
  const auto& g = w.gamma;
  return g[2] * least_squares_term(disc->forward(in.fake1), 1.0) +
         g[3] * least_squares_term(disc->forward(in.fake2), 1.0) +
         g[4] * least_squares_term(disc->forward(in.swap), 1.0);
}

torch::Tensor total_ld_loss(const torch::Tensor& recon, const torch::Tensor& swap,
                            const torch::Tensor& gan) {
  return recon + swap + gan;
}

}  // namespace facedit
