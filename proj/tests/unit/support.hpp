#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <torch/torch.h>

#include "facedit/config.hpp"
#include "facedit/engine.hpp"

namespace facedit::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("facedit-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// 128px run with narrow networks and two iterations per stage.
inline RunConfig tiny_config() {
  RunConfig cfg = RunConfig::desk();
  cfg.net.geometry_channels = 8;
  cfg.net.appearance_channels = 8;
  cfg.net.encoder_base = 4;
  cfg.net.appearance_base = 4;
  cfg.net.generator_res_blocks = 2;
  cfg.net.generator_up_channels = {8, 8, 8};
  cfg.net.embedding_channels = 8;
  cfg.net.disc_base = 4;
  cfg.net.perceptual_base = 4;
  cfg.net.fusion_base = 4;
  cfg.net.fusion_res_blocks = 1;
  cfg.iterations = {2, 2, 2, 2};
  cfg.log_every = 1;
  cfg.checkpoint_every = 1;
  cfg.smoothing_window = 1;
  return cfg;
}

/// Untrained engine with freshly initialised weights.
inline std::shared_ptr<Engine> fresh_engine(const RunConfig& cfg) {
  LocalModules modules;
  for (Component c : kAllComponents) modules.emplace(c, make_local_module(cfg, c));
  return std::make_shared<Engine>(cfg, std::move(modules), FusionNet(fusion_options(cfg)),
                                  MultiScaleDiscriminator(discriminator_options(cfg)));
}

inline torch::Tensor rand_double(torch::IntArrayRef shape, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return torch::rand(shape, gen, torch::dtype(torch::kFloat64));
}

inline torch::Tensor randn_double(torch::IntArrayRef shape, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return torch::randn(shape, gen, torch::dtype(torch::kFloat64));
}

/// Maximum relative error between autograd and central differences of a
/// scalar function of one double tensor.
template <typename F>
double gradient_error(F&& f, torch::Tensor x, double step = 1e-5) {
  x = x.detach().clone().set_requires_grad(true);
  auto y = f(x);
  y.backward();
  const auto analytic = x.grad().detach().clone();
  auto flat = x.detach().clone().reshape(-1);
  auto numeric = torch::zeros_like(flat);
  torch::NoGradGuard no_grad;
  for (std::int64_t i = 0; i < flat.numel(); ++i) {
    const double v = flat[i].item<double>();
    flat[i] = v + step;
    const double up = f(flat.view(x.sizes())).template item<double>();
    flat[i] = v - step;
    const double down = f(flat.view(x.sizes())).template item<double>();
    flat[i] = v;
    numeric[i] = (up - down) / (2.0 * step);
  }
  const auto a = analytic.reshape(-1);
  const double scale = std::max({a.abs().max().item<double>(), numeric.abs().max().item<double>(), 1e-8});
  return (a - numeric).abs().max().item<double>() / scale;
}

}  // namespace facedit::testing
