#include "facedit/nn_blocks.hpp"

namespace facedit::nn {

void init_weights(torch::nn::Module& module) {
  torch::NoGradGuard no_grad;
  for (auto& m : module.modules(/*include_self=*/false)) {
    if (auto* c = m->as<torch::nn::Conv2d>()) {
      torch::nn::init::normal_(c->weight, 0.0, 0.02);
      if (c->bias.defined()) torch::nn::init::zeros_(c->bias);
    } else if (auto* l = m->as<torch::nn::Linear>()) {
      torch::nn::init::normal_(l->weight, 0.0, 0.02);
      if (l->bias.defined()) torch::nn::init::zeros_(l->bias);
    } else if (auto* n = m->as<torch::nn::InstanceNorm2d>()) {
      if (n->weight.defined()) torch::nn::init::ones_(n->weight);
      if (n->bias.defined()) torch::nn::init::zeros_(n->bias);
    }
  }
}

ResidualBlockImpl::ResidualBlockImpl(int channels)
    : conv1_(register_module("conv1", conv(channels, channels, 3))),
      conv2_(register_module("conv2", conv(channels, channels, 3))),
      norm1_(register_module("norm1", instance_norm(channels))),
      norm2_(register_module("norm2", instance_norm(channels))) {}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(norm1_(conv1_(x)));
  return x + norm2_(conv2_(h));
}

UpBlockImpl::UpBlockImpl(int in, int out)
    : conv_(register_module("conv", conv(in, out, 3))),
      norm_(register_module("norm", instance_norm(out))) {}

torch::Tensor UpBlockImpl::forward(const torch::Tensor& x) {
  return torch::relu(norm_(conv_(upsample2x(x))));
}

torch::Tensor upsample2x(const torch::Tensor& x) {
  namespace F = torch::nn::functional;
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{2.0, 2.0})
                               .mode(torch::kNearest));
}

}  // namespace facedit::nn
