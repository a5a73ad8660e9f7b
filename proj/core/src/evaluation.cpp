#include "facedit/evaluation.hpp"

#include "facedit/raster.hpp"
#include "facedit/training.hpp"

namespace facedit {

double sketch_autoencoder_l1(const RunConfig& cfg, const RunPaths& paths, Component c,
                             const PairStore& train, int count) {
  auto m = load_local_module(cfg, paths, c, {Stage::kSketchAe});
  m.eval();
  const auto n = std::min<std::int64_t>(count, train.size());
  const auto s = crop(train.sketches().narrow(0, 0, n), cfg.layout().window(c)).contiguous();
  torch::NoGradGuard no_grad;
  return (m.sketch_decoder->forward(m.sketch_encoder->forward(s)) - s).abs().mean().item<double>();
}

double sketch_reconstruction_l1(const Engine& engine, const PairStore& pairs, int count) {
  const auto n = std::min<std::int64_t>(count, pairs.size());
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto p = pairs.pair(i);
    total += (engine.generate(p.sketch, p.image) - p.image).abs().mean().item<double>();
  }
  return n > 0 ? total / static_cast<double>(n) : 0.0;
}

double photo_reconstruction_l1(const Engine& engine, const PairStore& pairs, int count) {
  const auto n = std::min<std::int64_t>(count, pairs.size());
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto p = pairs.pair(i);
    total += (engine.reconstruct(p.image) - p.image).abs().mean().item<double>();
  }
  return n > 0 ? total / static_cast<double>(n) : 0.0;
}

}  // namespace facedit
