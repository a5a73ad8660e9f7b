#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "facedit/checkpoint.hpp"
#include "facedit/config.hpp"
#include "facedit/dataset.hpp"
#include "facedit/engine.hpp"
#include "facedit/local_module.hpp"
#include "facedit/losses.hpp"

namespace facedit {

/// Crops of every pair of one split for one component.
struct ComponentCrops {
  torch::Tensor images;    // N x 3 x h x w
  torch::Tensor sketches;  // N x 1 x h x w
};

/// Everything a training stage needs: config, run directory and data in memory.
struct TrainContext {
  RunConfig cfg;
  RunPaths paths{""};
  PairStore train;
  PairStore test;
  bool resume = false;
  PerceptualExtractor perceptual{nullptr};

  ComponentCrops crops(Component c, Split split) const;
};

/// Loads the dataset, checks that its resolution and layout match `cfg`, and
/// writes the effective config to `<run>/config.yaml`.
TrainContext open_training(const RunConfig& cfg, const std::filesystem::path& dataset_dir,
                           const std::filesystem::path& run_dir, bool resume);

struct StageReport {
  std::string owner;
  Stage stage = Stage::kSketchAe;
  int start_iteration = 0;  // iteration the run resumed from (0 for a fresh run)
  int end_iteration = 0;
  std::map<std::string, std::uint64_t> frozen_before;
  std::map<std::string, std::uint64_t> frozen_after;
  std::map<std::string, double> metrics;
};

/// Reports live at <run>/reports/<owner>/<stage>.json. write_report keeps an
/// existing report when `report` covers no new iterations.
std::filesystem::path report_path(const RunPaths& paths, const std::string& owner, Stage s);
void write_report(const RunPaths& paths, const StageReport& report);
StageReport read_report(const RunPaths& paths, const std::string& owner, Stage s);

/// Stage 1: sketch autoencoder with per-pixel L1 reconstruction.
StageReport train_sketch_autoencoder(TrainContext& ctx, Component c);
/// Stage 2: image geometry encoder aligned to the frozen sketch autoencoder.
StageReport train_image_alignment(TrainContext& ctx, Component c);
/// Stage 3: appearance encoder, generator and discriminator with the swap scheme.
StageReport train_ld(TrainContext& ctx, Component c);
std::vector<StageReport> train_all_components(TrainContext& ctx);
/// Stage 4: fusion network over frozen local modules.
StageReport train_gf(TrainContext& ctx);

/// Throws StageOrderError unless every stage before `s` is complete for the
/// configured components.
void require_prerequisites(const RunPaths& paths, const RunConfig& cfg, Stage s,
                           std::optional<Component> only = std::nullopt);

/// Loads the listed stages of one component from a run.
LocalModule load_local_module(const RunConfig& cfg, const RunPaths& paths, Component c,
                              std::initializer_list<Stage> stages);

/// Geometry source for (component, iteration): an independent fair coin per step.
GeometrySource geometry_coin(std::uint64_t seed, std::string_view owner, int iteration);

/// Position-indexed sampler over n items: a fresh seeded permutation every
/// epoch, so the draw at any iteration is reproducible without replay.
class EpochSampler {
 public:
  EpochSampler(std::int64_t n, std::uint64_t seed);
  std::int64_t at(std::int64_t position);

 private:
  std::int64_t n_;
  std::uint64_t seed_;
  std::int64_t epoch_ = -1;
  std::vector<std::int64_t> perm_;
};

struct SwapInputs {
  torch::Tensor sketch1;  // N x 1 x h x w
  torch::Tensor photo1;   // N x 3 x h x w, paired with sketch1
  torch::Tensor photo2;   // N x 3 x h x w
  GeometrySource source = GeometrySource::kSketch;
};

struct LdTerms {
  torch::Tensor recon_lab, recon_fm, recon_vgg, recon;
  torch::Tensor cycle_lab, cycle_fm, cycle_vgg, cycle;
  torch::Tensor geo, swap;
  torch::Tensor gan;  // generator side of the adversarial surrogate
  torch::Tensor total;
};

struct SwapOutputs {
  torch::Tensor swapped;     // I'   = G(f_G^1, f_A^2)
  torch::Tensor self_recon;  // I_1' = G(f_G^1, f_A^1)
  torch::Tensor cycle;       // I_2' = G(f_G^2, E_A(I'))
  LdTerms terms;
};

/// One generator-side forward pass of the swap scheme. Geometry encoders are
/// evaluated without gradients. Throws InvalidInput when photo2 is not RGB.
SwapOutputs swap_step(LocalModule& m, PerceptualExtractor& extractor, const SwapInputs& in,
                      const LossWeights& w);

}  // namespace facedit
