#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facedit/layout.hpp"
#include "facedit/sketch.hpp"

namespace facedit {

/// Channel widths and depths of every network. `desk()` is the workstation
/// preset (quarter-width channels), `full()` the 512px preset.
struct NetworkConfig {
  int down_stages = 3;  // geometry latent stride = 2^down_stages
  int geometry_channels = 64;
  int appearance_channels = 64;
  int encoder_base = 8;
  int appearance_base = 16;
  int sketch_decoder_res_blocks = 3;
  int generator_res_blocks = 4;
  std::vector<int> generator_up_channels = {64, 32, 64};
  int embedding_channels = 64;
  int disc_base = 16;
  int disc_scales = 2;
  int disc_down_layers = 3;
  int perceptual_base = 16;
  int fusion_base = 16;
  int fusion_down = 3;
  int fusion_res_blocks = 6;

  [[nodiscard]] int latent_stride() const { return 1 << down_stages; }
  /// Number of D_sketch layers (taps are 0..N).
  [[nodiscard]] int sketch_decoder_layers() const {
    return sketch_decoder_res_blocks + down_stages;
  }
};

struct LossWeights {
  // Self-reconstruction / cycle: Lab, feature matching, perceptual.
  std::array<double, 3> alpha = {1.0, 10.0, 10.0};
  // Swap: geometry, cycle.
  std::array<double, 2> tau = {1.0, 1.0};
  // Adversarial: real I1, real I2, fake I1', fake I2', fake I'.
  std::array<double, 5> gamma = {0.5, 0.5, 0.33, 0.33, 0.33};
  // Global fusion: adversarial, feature matching, perceptual.
  std::array<double, 3> fusion = {1.0, 10.0, 10.0};
};

struct OptimizerConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
  int batch_size = 2;
};

struct StageIterations {
  int ae = 8000;
  int align = 2000;
  int ld = 5000;
  int gf = 5000;
};

struct RunConfig {
  int resolution = 128;
  std::array<FractionalWindow, 5> layout_fractions = ComponentLayout::default_fractions();
  SketchParams sketch;
  NetworkConfig net;
  LossWeights weights;
  OptimizerConfig optim;
  StageIterations iterations;
  std::uint64_t seed = 7;
  double split_fraction = 29.9 / 32.2;
  std::vector<Component> components = {kAllComponents.begin(), kAllComponents.end()};
  int log_every = 10;
  /// Stage checkpoints and optimizer state are written every this many iterations.
  int checkpoint_every = 500;
  int smoothing_window = 100;
  /// Optional parameter blob for the perceptual extractor. Empty selects the
  /// fixed-seed random-weight extractor.
  std::string perceptual_weights;
  std::uint64_t perceptual_seed = 1234;

  [[nodiscard]] ComponentLayout layout() const;
  /// Throws ConfigError on inconsistent settings.
  void validate() const;

  static RunConfig desk();
  static RunConfig full();
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& yaml_text);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& cfg);

}  // namespace facedit
