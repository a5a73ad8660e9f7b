#include <benchmark/benchmark.h>

#include "facedit/appearance.hpp"
#include "facedit/engine.hpp"
#include "facedit/raster.hpp"
#include "facedit/sketch.hpp"
#include "facedit/synthetic_faces.hpp"

namespace facedit {
namespace {

RunConfig bench_config() {
  RunConfig cfg = RunConfig::desk();
  cfg.seed = 1;
  return cfg;
}

std::shared_ptr<Engine> bench_engine() {
  static const auto engine = [] {
    const auto cfg = bench_config();
    LocalModules modules;
    for (Component c : kAllComponents) modules.emplace(c, make_local_module(cfg, c));
    return std::make_shared<Engine>(cfg, std::move(modules), FusionNet(fusion_options(cfg)),
                                    MultiScaleDiscriminator(discriminator_options(cfg)));
  }();
  return engine;
}

void BM_Adain(benchmark::State& state) {
  const auto n = state.range(0);
  const auto x = torch::randn({1, 64, n, n});
  const auto g = torch::rand({1, 64});
  const auto b = torch::rand({1, 64});
  for (auto _ : state) benchmark::DoNotOptimize(adain(x, g, b));
}
BENCHMARK(BM_Adain)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ExtractSketch(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  SyntheticFaceOptions opts;
  opts.side = side;
  const auto face = mat_to_tensor(render_synthetic_face(1, 0, opts));
  for (auto _ : state) benchmark::DoNotOptimize(extract_sketch(face));
}
BENCHMARK(BM_ExtractSketch)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  const auto engine = bench_engine();
  const auto face = mat_to_tensor(render_synthetic_face(1, 0));
  const auto sketch = extract_sketch(face);
  for (auto _ : state) benchmark::DoNotOptimize(engine->generate(sketch, face));
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_RenderFromCodes(benchmark::State& state) {
  const auto engine = bench_engine();
  const auto codes = engine->disentangle(mat_to_tensor(render_synthetic_face(1, 0)));
  for (auto _ : state) benchmark::DoNotOptimize(engine->render(codes));
}
BENCHMARK(BM_RenderFromCodes)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace facedit

BENCHMARK_MAIN();
