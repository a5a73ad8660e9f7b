#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

#include <torch/torch.h>

#include "facedit/checkpoint.hpp"
#include "facedit/config.hpp"
#include "facedit/fusion.hpp"
#include "facedit/local_module.hpp"

namespace facedit {

/// Geometry and appearance codes of all five components (batched).
struct FaceCodes {
  std::map<Component, GeometryFeature> geometry;
  std::map<Component, AppearanceFeature> appearance;
  GeometrySource source = GeometrySource::kImage;
};

using LocalModules = std::map<Component, LocalModule>;

/// Crops `geometry` (N x 1 x H x W sketch or N x 3 x H x W photo) and `appearance`
/// (N x 3 x H x W) per layout window and encodes every component.
FaceCodes encode_face(LocalModules& modules, const torch::Tensor& geometry,
                      const torch::Tensor& appearance, const ComponentLayout& layout);

/// Per-component embeddings assembled onto the background embedding.
FeatureCanvas codes_to_canvas(LocalModules& modules, const FaceCodes& codes,
                              const ComponentLayout& layout);

/// Component-wise linear interpolation; t = 0 and t = 1 return the endpoint
/// tensors themselves.
FaceCodes lerp_codes(const FaceCodes& a, const FaceCodes& b, double t_geometry,
                     double t_appearance);

/// Module groups stored by each stage of a local module.
NamedModules stage_modules(LocalModule& m, Stage s);
NamedModules fusion_modules(FusionNet& net, MultiScaleDiscriminator& disc);

FusionNetOptions fusion_options(const RunConfig& cfg);

/// Writes bundle.json and config.yaml into a checkpoints directory, making it
/// loadable by Engine::load once every stage directory is present.
void write_bundle_manifest(const std::filesystem::path& dir, const RunConfig& cfg);

/// Trained networks of a run: five local modules plus the fusion network.
/// Parameters are read-only after load; the const inference methods are safe
/// to call from several threads.
class Engine {
 public:
  /// Loads `<run>/checkpoints` (or a bare checkpoints directory containing
  /// bundle.json). Throws CheckpointError on version mismatch or a missing
  /// component, before any network is populated.
  static std::shared_ptr<Engine> load(const std::filesystem::path& path);
  /// Writes bundle.json, config.yaml and every stage directory under `dir`.
  void save(const std::filesystem::path& dir) const;

  /// Assembles an engine from in-memory networks (tests, training).
  Engine(RunConfig cfg, LocalModules modules, FusionNet fusion, MultiScaleDiscriminator fusion_disc,
         std::map<std::string, StageMeta> metas = {});

  [[nodiscard]] const RunConfig& config() const { return cfg_; }
  [[nodiscard]] const ComponentLayout& layout() const { return layout_; }
  [[nodiscard]] int resolution() const { return cfg_.resolution; }

  /// Photo -> codes with geometry from the image encoder.
  FaceCodes disentangle(const torch::Tensor& image) const;
  /// Geometry from a sketch (1 channel) or photo (3 channels), appearance from a photo.
  FaceCodes encode(const torch::Tensor& geometry, const torch::Tensor& appearance) const;
  /// Replaces one component's appearance code with that of `reference`.
  FaceCodes with_component_appearance(const FaceCodes& codes, Component c,
                                      const torch::Tensor& reference) const;
  /// Codes -> 3 x H x W raster (first batch element when N = 1).
  torch::Tensor render(const FaceCodes& codes) const;

  torch::Tensor generate(const torch::Tensor& geometry, const torch::Tensor& appearance) const;
  torch::Tensor reconstruct(const torch::Tensor& image) const;
  torch::Tensor morph(const torch::Tensor& image1, const torch::Tensor& image2, double t_geometry,
                      double t_appearance) const;
  /// Rows sweep geometry t in [0,1], columns sweep appearance t in [0,1].
  torch::Tensor morph_grid(const torch::Tensor& image1, const torch::Tensor& image2, int n_geometry,
                           int n_appearance) const;

 private:
  RunConfig cfg_;
  ComponentLayout layout_;
  mutable LocalModules modules_;
  mutable FusionNet fusion_{nullptr};
  mutable MultiScaleDiscriminator fusion_disc_{nullptr};
  std::map<std::string, StageMeta> metas_;
};

}  // namespace facedit
