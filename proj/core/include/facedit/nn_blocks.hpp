#pragma once

#include <torch/torch.h>

namespace facedit::nn {

/// Zero-mean Gaussian (std 0.02) conv/linear weights, zero biases, unit/zero
/// affine normalization parameters.
void init_weights(torch::nn::Module& module);

/// Bounded output activation mapping R -> (0, 1): (tanh(x) + 1) / 2.
inline torch::Tensor unit_tanh(const torch::Tensor& x) { return (torch::tanh(x) + 1.0) * 0.5; }

inline torch::nn::Conv2d conv(int in, int out, int kernel, int stride = 1, int padding = -1) {
  if (padding < 0) padding = kernel / 2;
  return torch::nn::Conv2d(
      torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(padding));
}

inline torch::nn::InstanceNorm2d instance_norm(int channels) {
  return torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(channels).affine(true));
}

/// conv3x3 -> IN -> ReLU -> conv3x3 -> IN, plus identity skip.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::InstanceNorm2d norm1_{nullptr}, norm2_{nullptr};
};
TORCH_MODULE(ResidualBlock);

/// Nearest x2 upsample -> conv3x3 -> IN -> ReLU.
class UpBlockImpl : public torch::nn::Module {
 public:
  UpBlockImpl(int in, int out);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv_{nullptr};
  torch::nn::InstanceNorm2d norm_{nullptr};
};
TORCH_MODULE(UpBlock);

torch::Tensor upsample2x(const torch::Tensor& x);

}  // namespace facedit::nn
