#include "facedit/engine.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "facedit/errors.hpp"
#include "facedit/raster.hpp"

namespace facedit {

namespace fs = std::filesystem;

namespace {

torch::Tensor batched(const torch::Tensor& x) { return x.dim() == 3 ? x.unsqueeze(0) : x; }

torch::Tensor lerp(const torch::Tensor& a, const torch::Tensor& b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return (1.0 - t) * a + t * b;
}

std::string meta_key(std::string_view owner, Stage s) {
  return std::string(owner) + "/" + std::string(stage_name(s));
}

constexpr std::array<Stage, 3> kLocalStages = {Stage::kSketchAe, Stage::kAlign, Stage::kLd};

}  // namespace

NamedModules stage_modules(LocalModule& m, Stage s) {
  switch (s) {
    case Stage::kSketchAe:
      return {{"sketch_encoder", m.sketch_encoder.get()},
              {"sketch_decoder", m.sketch_decoder.get()}};
    case Stage::kAlign:
      return {{"image_encoder", m.image_encoder.get()}};
    case Stage::kLd:
      return {{"appearance_encoder", m.appearance_encoder.get()},
              {"generator", m.generator.get()},
              {"discriminator", m.discriminator.get()}};
    case Stage::kGf:
      break;
  }
  throw std::invalid_argument("local modules have no fusion stage");
}

NamedModules fusion_modules(FusionNet& net, MultiScaleDiscriminator& disc) {
  return {{"fusion_net", net.get()}, {"fusion_discriminator", disc.get()}};
}

FusionNetOptions fusion_options(const RunConfig& cfg) {
  return {cfg.net.embedding_channels, cfg.net.fusion_base, cfg.net.fusion_down,
          cfg.net.fusion_res_blocks, 3};
}

FaceCodes encode_face(LocalModules& modules, const torch::Tensor& geometry,
                      const torch::Tensor& appearance, const ComponentLayout& layout) {
  const auto g = batched(geometry);
  const auto a = batched(appearance);
  if (g.size(1) != 1 && g.size(1) != 3) throw ShapeError("geometry source must have 1 or 3 channels");
  if (a.size(1) != 3) throw ShapeError("appearance source must be RGB");
  FaceCodes codes;
  codes.source = g.size(1) == 1 ? GeometrySource::kSketch : GeometrySource::kImage;
  for (Component c : kAllComponents) {
    auto& m = modules.at(c);
    const auto& w = layout.window(c);
    codes.geometry[c] = codes.source == GeometrySource::kSketch
                            ? m.encode_sketch(crop(g, w))
                            : m.encode_image_geometry(crop(g, w));
    codes.appearance[c] = m.encode_appearance(crop(a, w));
  }
  return codes;
}

FeatureCanvas codes_to_canvas(LocalModules& modules, const FaceCodes& codes,
                              const ComponentLayout& layout) {
  std::map<Component, torch::Tensor> features;
  for (Component c : kFusionOrder) {
    features[c] = modules.at(c).embed(codes.geometry.at(c), codes.appearance.at(c));
  }
  const auto background = modules.at(Component::kBackground)
                              .embed(codes.geometry.at(Component::kBackground),
                                     codes.appearance.at(Component::kBackground));
  return assemble_feature_canvas(background, features, layout);
}

FaceCodes lerp_codes(const FaceCodes& a, const FaceCodes& b, double t_geometry,
                     double t_appearance) {
  FaceCodes out;
  out.source = a.source;
  for (Component c : kAllComponents) {
    const auto& ga = a.geometry.at(c);
    out.geometry[c] = {lerp(ga.data, b.geometry.at(c).data, t_geometry), ga.source, c};
    out.appearance[c] = {lerp(a.appearance.at(c).data, b.appearance.at(c).data, t_appearance), c};
  }
  return out;
}

Engine::Engine(RunConfig cfg, LocalModules modules, FusionNet fusion,
               MultiScaleDiscriminator fusion_disc, std::map<std::string, StageMeta> metas)
    : cfg_(std::move(cfg)),
      layout_(cfg_.layout()),
      modules_(std::move(modules)),
      fusion_(std::move(fusion)),
      fusion_disc_(std::move(fusion_disc)),
      metas_(std::move(metas)) {
  for (Component c : kAllComponents) {
    if (!modules_.contains(c)) {
      throw CheckpointError("engine is missing the " + std::string(component_name(c)) + " module");
    }
    modules_.at(c).eval();
  }
  fusion_->eval();
  fusion_disc_->eval();
}

std::shared_ptr<Engine> Engine::load(const fs::path& path) {
  fs::path dir = path;
  if (!fs::exists(dir / "bundle.json") && fs::exists(dir / "checkpoints" / "bundle.json")) {
    dir = dir / "checkpoints";
  }
  std::ifstream in(dir / "bundle.json");
  if (!in) throw CheckpointError("no bundle.json under " + path.string());
  nlohmann::json bundle;
  try {
    bundle = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed bundle.json: ") + e.what());
  }
  const int version = bundle.value("format_version", -1);
  if (version != kBundleFormatVersion) {
    throw CheckpointError("bundle format version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kBundleFormatVersion) +
                          ")");
  }
  const auto cfg = load_run_config(dir / "config.yaml");
  const RunPaths paths(dir.parent_path());
  // Check presence of every stage before building or loading anything.
  std::map<std::string, StageMeta> metas;
  for (Component c : kAllComponents) {
    for (Stage s : kLocalStages) {
      const auto what = std::string(component_name(c)) + " " + std::string(stage_name(s));
      metas[meta_key(component_name(c), s)] =
          read_stage_meta(dir / std::string(component_name(c)) / std::string(stage_dir_name(s)),
                          what);
    }
  }
  metas[meta_key("fusion", Stage::kGf)] = read_stage_meta(dir / "fusion", "fusion");

  LocalModules modules;
  for (Component c : kAllComponents) {
    auto m = make_local_module(cfg, c);
    for (Stage s : kLocalStages) {
      load_stage(dir / std::string(component_name(c)) / std::string(stage_dir_name(s)),
                 stage_modules(m, s),
                 std::string(component_name(c)) + " " + std::string(stage_name(s)));
    }
    modules.emplace(c, std::move(m));
  }
  FusionNet fusion(fusion_options(cfg));
  MultiScaleDiscriminator disc(discriminator_options(cfg));
  load_stage(dir / "fusion", fusion_modules(fusion, disc), "fusion");
  return std::make_shared<Engine>(cfg, std::move(modules), fusion, disc, std::move(metas));
}

void Engine::save(const fs::path& dir) const {
  fs::create_directories(dir);
  auto meta_for = [&](std::string_view owner, Stage s) {
    const auto it = metas_.find(meta_key(owner, s));
    StageMeta m = it != metas_.end() ? it->second : StageMeta{};
    m.owner = owner;
    m.stage = s;
    return m;
  };
  for (Component c : kAllComponents) {
    auto& m = modules_.at(c);
    for (Stage s : kLocalStages) {
      save_stage(dir / std::string(component_name(c)) / std::string(stage_dir_name(s)),
                 stage_modules(m, s), meta_for(component_name(c), s));
    }
  }
  save_stage(dir / "fusion", fusion_modules(fusion_, fusion_disc_), meta_for("fusion", Stage::kGf));
  write_bundle_manifest(dir, cfg_);
}

void write_bundle_manifest(const fs::path& dir, const RunConfig& cfg) {
  fs::create_directories(dir);
  save_run_config(cfg, dir / "config.yaml");
  nlohmann::ordered_json bundle;
  bundle["format_version"] = kBundleFormatVersion;
  bundle["resolution"] = cfg.resolution;
  std::vector<std::string> names;
  for (Component c : kAllComponents) names.emplace_back(component_name(c));
  bundle["components"] = names;
  std::ofstream out(dir / "bundle.json", std::ios::trunc);
  out << bundle.dump(2) << '\n';
  if (!out) throw CheckpointError("cannot write " + (dir / "bundle.json").string());
}

FaceCodes Engine::disentangle(const torch::Tensor& image) const {
  torch::NoGradGuard no_grad;
  const auto x = batched(image);
  if (x.size(1) != 3) throw ShapeError("disentangle expects an RGB image");
  return encode_face(modules_, x, x, layout_);
}

FaceCodes Engine::encode(const torch::Tensor& geometry, const torch::Tensor& appearance) const {
  torch::NoGradGuard no_grad;
  return encode_face(modules_, geometry, appearance, layout_);
}

FaceCodes Engine::with_component_appearance(const FaceCodes& codes, Component c,
                                            const torch::Tensor& reference) const {
  torch::NoGradGuard no_grad;
  FaceCodes out = codes;
  out.appearance[c] = modules_.at(c).encode_appearance(crop(batched(reference), layout_.window(c)));
  return out;
}

torch::Tensor Engine::render(const FaceCodes& codes) const {
  torch::NoGradGuard no_grad;
  const auto canvas = codes_to_canvas(modules_, codes, layout_);
  auto out = fusion_->forward(canvas.data);
  return out.size(0) == 1 ? out[0] : out;
}

torch::Tensor Engine::generate(const torch::Tensor& geometry,
                               const torch::Tensor& appearance) const {
  return render(encode(geometry, appearance));
}

torch::Tensor Engine::reconstruct(const torch::Tensor& image) const {
  return render(disentangle(image));
}

torch::Tensor Engine::morph(const torch::Tensor& image1, const torch::Tensor& image2,
                            double t_geometry, double t_appearance) const {
  for (double t : {t_geometry, t_appearance}) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("morph weights must lie in [0, 1]");
  }
  return render(lerp_codes(disentangle(image1), disentangle(image2), t_geometry, t_appearance));
}

torch::Tensor Engine::morph_grid(const torch::Tensor& image1, const torch::Tensor& image2,
                                 int n_geometry, int n_appearance) const {
  if (n_geometry < 1 || n_appearance < 1) throw InvalidInput("morph grid needs at least 1x1 cells");
  const auto a = disentangle(image1);
  const auto b = disentangle(image2);
  auto step = [](int i, int n) { return n == 1 ? 0.0 : static_cast<double>(i) / (n - 1); };
  std::vector<torch::Tensor> rows;
  for (int i = 0; i < n_geometry; ++i) {
    std::vector<torch::Tensor> cells;
    for (int j = 0; j < n_appearance; ++j) {
      cells.push_back(render(lerp_codes(a, b, step(i, n_geometry), step(j, n_appearance))));
    }
    rows.push_back(torch::cat(cells, 2));
  }
  return torch::cat(rows, 1);
}

}  // namespace facedit
