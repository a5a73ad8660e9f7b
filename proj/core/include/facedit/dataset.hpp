#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "facedit/config.hpp"
#include "facedit/layout.hpp"
#include "facedit/sketch.hpp"

namespace facedit {

/// One aligned photo and its binary sketch at a common resolution.
struct SketchImagePair {
  std::string id;
  torch::Tensor image;   // 3 x H x W, [0,1]
  torch::Tensor sketch;  // 1 x H x W, {0,1}

  /// Throws ShapeError/InvalidInput when the pair breaks its invariants.
  void validate(int resolution) const;
};

enum class Split { kTrain, kTest };

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;   // relative to the manifest directory
  std::filesystem::path sketch;  // relative to the manifest directory
  Split split = Split::kTrain;
  bool operator==(const ManifestEntry&) const = default;
};

/// Dataset index: `manifest.jsonl` (one entry per line) plus `dataset.yaml`
/// (resolution, layout and extraction parameters) in the same directory.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  DatasetManifest(std::filesystem::path root, std::vector<ManifestEntry> entries,
                  RunConfig settings);

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }
  [[nodiscard]] const std::vector<ManifestEntry>& entries() const { return entries_; }
  [[nodiscard]] const RunConfig& settings() const { return settings_; }
  [[nodiscard]] int resolution() const { return settings_.resolution; }
  [[nodiscard]] ComponentLayout layout() const { return settings_.layout(); }
  [[nodiscard]] std::vector<ManifestEntry> split(Split s) const;
  [[nodiscard]] std::size_t count(Split s) const;

  /// Writes manifest.jsonl and dataset.yaml under root().
  void save() const;
  /// Loads and checks uniqueness of ids and existence of referenced files.
  static DatasetManifest load(const std::filesystem::path& dir);

  static constexpr const char* kManifestFile = "manifest.jsonl";
  static constexpr const char* kSettingsFile = "dataset.yaml";

 private:
  std::filesystem::path root_;
  std::vector<ManifestEntry> entries_;
  RunConfig settings_;
};

struct BuildOptions {
  RunConfig settings = RunConfig::desk();  // resolution, layout, sketch params, seed, split
};

/// Extracts sketches for every readable image in `image_dir`, writes PNGs and the
/// manifest into `out_dir`. Unreadable images are logged and skipped; throws
/// InvalidInput when nothing usable remains.
DatasetManifest build_dataset(const std::filesystem::path& image_dir,
                              const std::filesystem::path& out_dir, const BuildOptions& opts);

/// Train/test assignment: ids ranked by a seeded hash, the first
/// round(n * fraction) go to train.
std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids,
                                           double fraction, std::uint64_t seed);

/// Window crops of a raster for every component; background is the full raster.
std::map<Component, torch::Tensor> crop_components(const torch::Tensor& raster,
                                                   const ComponentLayout& layout);

/// Reassembles crops onto a copy of the background crop, painting the other
/// components in fusion order.
torch::Tensor paste_components(const std::map<Component, torch::Tensor>& crops,
                               const ComponentLayout& layout);

/// All pairs of one split held in memory as stacked tensors.
class PairStore {
 public:
  PairStore() = default;
  PairStore(const DatasetManifest& manifest, Split split);
  PairStore(std::vector<std::string> ids, torch::Tensor images, torch::Tensor sketches);

  [[nodiscard]] std::int64_t size() const { return images_.defined() ? images_.size(0) : 0; }
  [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
  [[nodiscard]] const torch::Tensor& images() const { return images_; }      // N x 3 x H x W
  [[nodiscard]] const torch::Tensor& sketches() const { return sketches_; }  // N x 1 x H x W
  [[nodiscard]] SketchImagePair pair(std::int64_t i) const;

 private:
  std::vector<std::string> ids_;
  torch::Tensor images_;
  torch::Tensor sketches_;
};

std::string_view split_name(Split s);

}  // namespace facedit
