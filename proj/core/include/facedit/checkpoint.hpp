#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "facedit/layout.hpp"

namespace facedit {

enum class Stage { kSketchAe, kAlign, kLd, kGf };

/// CLI spelling: ae, align, ld, gf.
std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

inline constexpr int kBundleFormatVersion = 1;

/// Directory layout of a run:
///   config.yaml
///   checkpoints/bundle.json
///   checkpoints/<component>/{sketch_ae,image_encoder,ld}/  *.fdpb + meta.json
///   checkpoints/fusion/                                    *.fdpb + meta.json
///   train_state/<component|fusion>/<stage>/               optimizer state
///   logs/<component|fusion>/<stage>.csv
class RunPaths {
 public:
  explicit RunPaths(std::filesystem::path root) : root_(std::move(root)) {}

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }
  [[nodiscard]] std::filesystem::path config() const { return root_ / "config.yaml"; }
  [[nodiscard]] std::filesystem::path checkpoints() const { return root_ / "checkpoints"; }
  [[nodiscard]] std::filesystem::path stage_dir(Component c, Stage s) const;
  [[nodiscard]] std::filesystem::path fusion_dir() const { return checkpoints() / "fusion"; }
  [[nodiscard]] std::filesystem::path train_state(std::string_view owner, Stage s) const;
  [[nodiscard]] std::filesystem::path log(std::string_view owner, Stage s) const;

 private:
  std::filesystem::path root_;
};

/// Checkpoint directory name of a stage relative to its owner.
std::string_view stage_dir_name(Stage s);

struct StageMeta {
  std::string owner;  // component name or "fusion"
  Stage stage = Stage::kSketchAe;
  int iteration = 0;
  int target_iterations = 0;
  std::uint64_t seed = 0;
  int latent_channels = 0;
  int latent_stride = 0;
  int latent_h = 0;
  int latent_w = 0;
  std::map<std::string, std::string> files;  // blob name -> hex digest

  [[nodiscard]] bool complete() const { return iteration >= target_iterations; }
};

using NamedModules = std::vector<std::pair<std::string, torch::nn::Module*>>;

/// Writes `<name>.fdpb` for every module plus meta.json (with digests).
void save_stage(const std::filesystem::path& dir, const NamedModules& modules, StageMeta meta);

/// Reads meta.json only. Throws CheckpointError naming `what` when absent.
StageMeta read_stage_meta(const std::filesystem::path& dir, std::string_view what);

/// Loads every blob after verifying its digest. Modules are modified only if
/// all blobs validate.
StageMeta load_stage(const std::filesystem::path& dir, const NamedModules& modules,
                     std::string_view what);

/// True when meta.json exists and records a finished stage.
bool stage_complete(const std::filesystem::path& dir);

/// Content digest of every regular file below `dir`, keyed by relative path.
std::uint64_t directory_hash(const std::filesystem::path& dir);

}  // namespace facedit
