#include "facedit/training.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "facedit/errors.hpp"
#include "facedit/log.hpp"
#include "facedit/param_io.hpp"
#include "facedit/raster.hpp"
#include "facedit/training_log.hpp"

namespace facedit {

namespace fs = std::filesystem;

namespace {

torch::optim::Adam make_adam(const std::vector<torch::Tensor>& params, const OptimizerConfig& o) {
  return torch::optim::Adam(params,
                            torch::optim::AdamOptions(o.lr).betas({o.beta1, o.beta2}));
}

std::vector<torch::Tensor> params_of(std::initializer_list<torch::nn::Module*> modules) {
  std::vector<torch::Tensor> out;
  for (auto* m : modules) {
    for (auto& p : m->parameters()) out.push_back(p);
  }
  return out;
}

std::map<std::string, std::uint64_t> hashes(const NamedModules& modules) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [name, m] : modules) out[name] = parameter_hash(*m);
  return out;
}

NamedModules concat(NamedModules a, const NamedModules& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

torch::Tensor draw(EpochSampler& s, int iteration, int batch) {
  std::vector<std::int64_t> idx;
  for (int j = 0; j < batch; ++j) {
    idx.push_back(s.at(static_cast<std::int64_t>(iteration - 1) * batch + j));
  }
  return torch::tensor(idx, torch::kLong);
}

/// Checkpointing, resume and logging shared by every stage.
class StageRun {
 public:
  StageRun(TrainContext& ctx, std::string owner, Stage stage, fs::path dir, NamedModules modules,
           StageMeta meta, int target)
      : ctx_(ctx),
        owner_(std::move(owner)),
        stage_(stage),
        dir_(std::move(dir)),
        state_dir_(ctx.paths.train_state(owner_, stage)),
        modules_(std::move(modules)),
        meta_(std::move(meta)),
        target_(target) {
    meta_.owner = owner_;
    meta_.stage = stage_;
    meta_.target_iterations = target_;
    meta_.seed = ctx.cfg.seed;
  }

  void add_optimizer(std::string name, torch::optim::Optimizer& opt) {
    optimizers_.emplace_back(std::move(name), &opt);
  }

  int begin() {
    if (!ctx_.resume || !fs::exists(state_dir_ / "state.json")) return 0;
    std::ifstream in(state_dir_ / "state.json");
    const int k = nlohmann::json::parse(in).at("iteration").get<int>();
    const auto meta = load_stage(dir_, modules_, label());
    if (meta.iteration != k) {
      throw CheckpointError(label() + ": optimizer state and checkpoint disagree on iteration");
    }
    for (auto& [name, opt] : optimizers_) torch::load(*opt, (state_dir_ / (name + ".pt")).string());
    log::info(log::cat(label(), ": resuming at iteration ", k));
    return k;
  }

  void save(int iteration) {
    meta_.iteration = iteration;
    save_stage(dir_, modules_, meta_);
    fs::create_directories(state_dir_);
    for (auto& [name, opt] : optimizers_) torch::save(*opt, (state_dir_ / (name + ".pt")).string());
    std::ofstream out(state_dir_ / "state.json", std::ios::trunc);
    out << nlohmann::json{{"iteration", iteration}}.dump() << '\n';
    last_saved_ = iteration;
  }

  void run(LossLog& log, int start, const std::function<std::vector<double>(int)>& step) {
    if (start >= target_) {
      if (!stage_complete(dir_)) save(start);
      return;
    }
    for (int it = start + 1; it <= target_; ++it) {
      const auto values = step(it);
      for (double v : values) {
        if (!std::isfinite(v)) {
          const auto msg = log::cat(label(), ": non-finite loss at iteration ", it,
                                    "; last good checkpoint is iteration ", last_saved_, " in ",
                                    dir_.string());
          log::error(msg);
          throw TrainingAborted(msg);
        }
      }
      log.append(it, values);
      if (it % ctx_.cfg.checkpoint_every == 0 || it == target_) save(it);
      if (it % ctx_.cfg.log_every == 0 || it == target_) {
        log::info(log::cat(label(), " ", it, "/", target_, " loss ", values.back()));
      }
    }
  }

  [[nodiscard]] std::string label() const {
    return owner_ + " " + std::string(stage_name(stage_));
  }

 private:
  TrainContext& ctx_;
  std::string owner_;
  Stage stage_;
  fs::path dir_;
  fs::path state_dir_;
  NamedModules modules_;
  StageMeta meta_;
  int target_;
  int last_saved_ = -1;
  std::vector<std::pair<std::string, torch::optim::Optimizer*>> optimizers_;
};

StageMeta latent_meta(const RunConfig& cfg, const LocalModule& m) {
  StageMeta meta;
  meta.latent_channels = cfg.net.geometry_channels;
  meta.latent_stride = cfg.net.latent_stride();
  std::tie(meta.latent_h, meta.latent_w) = m.latent_size();
  return meta;
}

void check_pairs(std::int64_t n, const std::string& what) {
  if (n < 2) throw InvalidInput(what + " needs at least two training pairs");
}

double mean_l1_decoded(LocalModule& m, const torch::Tensor& sketches) {
  torch::NoGradGuard no_grad;
  return (m.sketch_decoder->forward(m.sketch_encoder->forward(sketches)) - sketches)
      .abs()
      .mean()
      .item<double>();
}

double heldout_alignment(LocalModule& m, const ComponentCrops& crops, std::int64_t limit) {
  torch::NoGradGuard no_grad;
  const auto n = std::min<std::int64_t>(limit, crops.images.size(0));
  if (n == 0) return 0.0;
  const auto s = crops.sketches.narrow(0, 0, n);
  const auto p = crops.images.narrow(0, 0, n);
  return alignment_loss(m.image_encoder->forward(p), m.sketch_encoder->forward(s),
                        m.sketch_decoder)
      .item<double>();
}

}  // namespace

EpochSampler::EpochSampler(std::int64_t n, std::uint64_t seed) : n_(n), seed_(seed) {
  if (n <= 0) throw InvalidInput("sampler over an empty set");
}

std::int64_t EpochSampler::at(std::int64_t position) {
  const auto epoch = position / n_;
  if (epoch != epoch_) {
    perm_.resize(static_cast<std::size_t>(n_));
    std::iota(perm_.begin(), perm_.end(), 0);
    std::mt19937_64 gen(derive_seed(seed_, {"epoch"}, epoch));
    std::shuffle(perm_.begin(), perm_.end(), gen);
    epoch_ = epoch;
  }
  return perm_[static_cast<std::size_t>(position % n_)];
}

GeometrySource geometry_coin(std::uint64_t seed, std::string_view owner, int iteration) {
  std::mt19937_64 gen(derive_seed(seed, {"coin", owner}, iteration));
  return (gen() >> 63) != 0 ? GeometrySource::kSketch : GeometrySource::kImage;
}

ComponentCrops TrainContext::crops(Component c, Split split) const {
  const auto& store = split == Split::kTrain ? train : test;
  if (store.size() == 0) {
    const auto w = cfg.layout().window(c);
    return {torch::zeros({0, 3, w.h, w.w}), torch::zeros({0, 1, w.h, w.w})};
  }
  const auto w = cfg.layout().window(c);
  return {crop(store.images(), w).contiguous(), crop(store.sketches(), w).contiguous()};
}

TrainContext open_training(const RunConfig& cfg, const fs::path& dataset_dir,
                           const fs::path& run_dir, bool resume) {
  cfg.validate();
  const auto manifest = DatasetManifest::load(dataset_dir);
  if (manifest.resolution() != cfg.resolution) {
    throw ConfigError("dataset resolution " + std::to_string(manifest.resolution()) +
                      " differs from config resolution " + std::to_string(cfg.resolution));
  }
  if (!(manifest.layout() == cfg.layout())) {
    throw ConfigError("dataset layout differs from config layout");
  }
  TrainContext ctx;
  ctx.cfg = cfg;
  ctx.paths = RunPaths(run_dir);
  ctx.resume = resume;
  ctx.train = PairStore(manifest, Split::kTrain);
  ctx.test = PairStore(manifest, Split::kTest);
  ctx.perceptual = make_perceptual_extractor(cfg);
  save_run_config(cfg, ctx.paths.config());
  return ctx;
}

void require_prerequisites(const RunPaths& paths, const RunConfig& cfg, Stage s,
                           std::optional<Component> only) {
  auto need = [&](Component c, Stage prior) {
    if (!stage_complete(paths.stage_dir(c, prior))) {
      throw StageOrderError("stage '" + std::string(stage_name(s)) + "' requires a finished '" +
                            std::string(stage_name(prior)) + "' stage for " +
                            std::string(component_name(c)));
    }
  };
  std::vector<Component> comps;
  if (s == Stage::kGf) {
    comps.assign(kAllComponents.begin(), kAllComponents.end());
  } else if (only) {
    comps.push_back(*only);
  } else {
    comps = cfg.components;
  }
  for (Component c : comps) {
    for (int p = 0; p < static_cast<int>(s); ++p) need(c, static_cast<Stage>(p));
  }
}

LocalModule load_local_module(const RunConfig& cfg, const RunPaths& paths, Component c,
                              std::initializer_list<Stage> stages) {
  auto m = make_local_module(cfg, c);
  for (Stage s : stages) {
    load_stage(paths.stage_dir(c, s), stage_modules(m, s),
               std::string(component_name(c)) + " " + std::string(stage_name(s)));
  }
  return m;
}

StageReport train_sketch_autoencoder(TrainContext& ctx, Component c) {
  const auto& cfg = ctx.cfg;
  const std::string owner(component_name(c));
  auto m = make_local_module(cfg, c);
  const auto data = ctx.crops(c, Split::kTrain);
  check_pairs(data.sketches.size(0), owner + " ae");

  auto opt = make_adam(params_of({m.sketch_encoder.get(), m.sketch_decoder.get()}), cfg.optim);
  StageRun run(ctx, owner, Stage::kSketchAe, ctx.paths.stage_dir(c, Stage::kSketchAe),
               stage_modules(m, Stage::kSketchAe), latent_meta(cfg, m), cfg.iterations.ae);
  run.add_optimizer("adam", opt);
  StageReport report;
  report.owner = owner;
  report.stage = Stage::kSketchAe;
  report.start_iteration = run.begin();
  LossLog log(ctx.paths.log(owner, Stage::kSketchAe), {"l1", "total"}, report.start_iteration);
  EpochSampler sampler(data.sketches.size(0), derive_seed(cfg.seed, {"sample", owner, "ae"}));

  run.run(log, report.start_iteration, [&](int it) {
    const auto s = data.sketches.index_select(0, draw(sampler, it, cfg.optim.batch_size));
    const auto loss = (m.sketch_decoder->forward(m.sketch_encoder->forward(s)) - s).abs().mean();
    opt.zero_grad();
    loss.backward();
    opt.step();
    const double v = loss.item<double>();
    return std::vector<double>{v, v};
  });
  report.end_iteration = cfg.iterations.ae;
  const auto n = std::min<std::int64_t>(10, data.sketches.size(0));
  report.metrics["train_l1"] = mean_l1_decoded(m, data.sketches.narrow(0, 0, n));
  return report;
}

StageReport train_image_alignment(TrainContext& ctx, Component c) {
  const auto& cfg = ctx.cfg;
  const std::string owner(component_name(c));
  require_prerequisites(ctx.paths, cfg, Stage::kAlign, c);
  auto m = load_local_module(cfg, ctx.paths, c, {Stage::kSketchAe});
  set_trainable(*m.sketch_encoder, false);
  set_trainable(*m.sketch_decoder, false);
  const auto frozen = stage_modules(m, Stage::kSketchAe);
  StageReport report;
  report.owner = owner;
  report.stage = Stage::kAlign;
  report.frozen_before = hashes(frozen);

  const auto data = ctx.crops(c, Split::kTrain);
  const auto heldout = ctx.crops(c, Split::kTest);
  check_pairs(data.images.size(0), owner + " align");
  auto opt = make_adam(params_of({m.image_encoder.get()}), cfg.optim);
  StageRun run(ctx, owner, Stage::kAlign, ctx.paths.stage_dir(c, Stage::kAlign),
               stage_modules(m, Stage::kAlign), latent_meta(cfg, m), cfg.iterations.align);
  run.add_optimizer("adam", opt);
  report.start_iteration = run.begin();
  report.metrics["heldout_start"] = heldout_alignment(m, heldout, 16);

  std::vector<std::string> columns;
  for (int i = 0; i <= m.sketch_decoder->layers(); ++i) columns.push_back("tap" + std::to_string(i));
  columns.emplace_back("total");
  LossLog log(ctx.paths.log(owner, Stage::kAlign), columns, report.start_iteration);
  EpochSampler sampler(data.images.size(0), derive_seed(cfg.seed, {"sample", owner, "align"}));

  run.run(log, report.start_iteration, [&](int it) {
    const auto idx = draw(sampler, it, cfg.optim.batch_size);
    torch::Tensor target;
    {
      torch::NoGradGuard no_grad;
      target = m.sketch_encoder->forward(data.sketches.index_select(0, idx));
    }
    const auto terms = alignment_terms(m.image_encoder->forward(data.images.index_select(0, idx)),
                                       target, m.sketch_decoder);
    const auto loss = torch::stack(terms).sum();
    opt.zero_grad();
    loss.backward();
    opt.step();
    std::vector<double> values;
    for (const auto& t : terms) values.push_back(t.item<double>());
    values.push_back(loss.item<double>());
    return values;
  });
  report.end_iteration = cfg.iterations.align;
  report.metrics["heldout_end"] = heldout_alignment(m, heldout, 16);
  report.frozen_after = hashes(frozen);
  return report;
}

SwapOutputs swap_step(LocalModule& m, PerceptualExtractor& extractor, const SwapInputs& in,
                      const LossWeights& w) {
  if (in.photo2.dim() != 4 || in.photo2.size(1) != 3) {
    throw InvalidInput("swap step: I_2 must be an RGB photo crop");
  }
  if (in.photo1.dim() != 4 || in.photo1.size(1) != 3) {
    throw InvalidInput("swap step: the photo paired with I_1 must be RGB");
  }
  GeometryFeature g1;
  GeometryFeature g2;
  {
    torch::NoGradGuard no_grad;
    g1 = in.source == GeometrySource::kSketch ? m.encode_sketch(in.sketch1)
                                              : m.encode_image_geometry(in.photo1);
    g2 = m.encode_image_geometry(in.photo2);
  }
  const auto a1 = m.encode_appearance(in.photo1);
  const auto a2 = m.encode_appearance(in.photo2);

  SwapOutputs out;
  out.swapped = m.synthesize(g1, a2);
  out.self_recon = m.synthesize(g1, a1);
  out.cycle = m.synthesize(g2, m.encode_appearance(out.swapped));

  auto& disc = m.discriminator;
  std::vector<ScaleOutput> real1;
  std::vector<ScaleOutput> real2;
  {
    torch::NoGradGuard no_grad;
    real1 = disc->forward(in.photo1);
    real2 = disc->forward(in.photo2);
  }
  const auto fake1 = disc->forward(out.self_recon);
  const auto fake2 = disc->forward(out.cycle);
  const auto fake_swap = disc->forward(out.swapped);

  auto& t = out.terms;
  t.recon_lab = lab_color_loss(in.photo1, out.self_recon);
  t.recon_fm = feature_matching_loss(real1, fake1);
  t.recon_vgg = perceptual_loss(in.photo1, out.self_recon, extractor);
  t.recon = reconstruction_loss(t.recon_lab, t.recon_fm, t.recon_vgg, w);
  t.cycle_lab = lab_color_loss(in.photo2, out.cycle);
  t.cycle_fm = feature_matching_loss(real2, fake2);
  t.cycle_vgg = perceptual_loss(in.photo2, out.cycle, extractor);
  t.cycle = reconstruction_loss(t.cycle_lab, t.cycle_fm, t.cycle_vgg, w);
  if (in.source == GeometrySource::kImage) {
    t.geo = (g1.data - m.image_encoder->forward(out.swapped)).abs().mean();
  } else {
    t.geo = torch::zeros({}, out.swapped.options());
  }
  t.swap = swap_loss(t.geo, t.cycle, w);
  t.gan = w.gamma[2] * least_squares_term(fake1, 1.0) + w.gamma[3] * least_squares_term(fake2, 1.0) +
          w.gamma[4] * least_squares_term(fake_swap, 1.0);
  t.total = total_ld_loss(t.recon, t.swap, t.gan);
  return out;
}

StageReport train_ld(TrainContext& ctx, Component c) {
  const auto& cfg = ctx.cfg;
  const std::string owner(component_name(c));
  require_prerequisites(ctx.paths, cfg, Stage::kLd, c);
  auto m = load_local_module(cfg, ctx.paths, c, {Stage::kSketchAe, Stage::kAlign});
  const auto frozen = concat(stage_modules(m, Stage::kSketchAe), stage_modules(m, Stage::kAlign));
  for (const auto& [name, mod] : frozen) set_trainable(*mod, false);
  StageReport report;
  report.owner = owner;
  report.stage = Stage::kLd;
  report.frozen_before = hashes(frozen);

  const auto data = ctx.crops(c, Split::kTrain);
  const auto n = data.images.size(0);
  check_pairs(n, owner + " ld");
  auto opt_g = make_adam(params_of({m.appearance_encoder.get(), m.generator.get()}), cfg.optim);
  auto opt_d = make_adam(params_of({m.discriminator.get()}), cfg.optim);
  StageRun run(ctx, owner, Stage::kLd, ctx.paths.stage_dir(c, Stage::kLd),
               stage_modules(m, Stage::kLd), latent_meta(cfg, m), cfg.iterations.ld);
  run.add_optimizer("adam_g", opt_g);
  run.add_optimizer("adam_d", opt_d);
  report.start_iteration = run.begin();
  LossLog log(ctx.paths.log(owner, Stage::kLd),
              {"sketch_source", "recon_lab", "recon_fm", "recon_vgg", "geo", "cycle_lab",
               "cycle_fm", "cycle_vgg", "gan_g", "disc", "total"},
              report.start_iteration);
  EpochSampler first(n, derive_seed(cfg.seed, {"sample", owner, "ld", "1"}));
  EpochSampler second(n, derive_seed(cfg.seed, {"sample", owner, "ld", "2"}));

  run.run(log, report.start_iteration, [&](int it) {
    const auto i1 = draw(first, it, cfg.optim.batch_size);
    auto i2 = draw(second, it, cfg.optim.batch_size);
    i2 = torch::where(i2 == i1, (i2 + 1) % n, i2);
    SwapInputs in{data.sketches.index_select(0, i1), data.images.index_select(0, i1),
                  data.images.index_select(0, i2), geometry_coin(cfg.seed, owner, it)};

    set_trainable(*m.discriminator, false);
    auto out = swap_step(m, ctx.perceptual, in, cfg.weights);
    opt_g.zero_grad();
    out.terms.total.backward();
    opt_g.step();

    set_trainable(*m.discriminator, true);
    opt_d.zero_grad();
    const auto d_loss = discriminator_objective(
        m.discriminator, {in.photo1, in.photo2, out.self_recon, out.cycle, out.swapped},
        cfg.weights);
    d_loss.backward();
    opt_d.step();

    const auto& t = out.terms;
    return std::vector<double>{in.source == GeometrySource::kSketch ? 1.0 : 0.0,
                               t.recon_lab.item<double>(),
                               t.recon_fm.item<double>(),
                               t.recon_vgg.item<double>(),
                               t.geo.item<double>(),
                               t.cycle_lab.item<double>(),
                               t.cycle_fm.item<double>(),
                               t.cycle_vgg.item<double>(),
                               t.gan.item<double>(),
                               d_loss.item<double>(),
                               t.total.item<double>()};
  });
  report.end_iteration = cfg.iterations.ld;
  report.frozen_after = hashes(frozen);
  return report;
}

std::vector<StageReport> train_all_components(TrainContext& ctx) {
  require_prerequisites(ctx.paths, ctx.cfg, Stage::kLd);
  std::vector<StageReport> out;
  for (Component c : ctx.cfg.components) out.push_back(train_ld(ctx, c));
  return out;
}

StageReport train_gf(TrainContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_prerequisites(ctx.paths, cfg, Stage::kGf);
  LocalModules modules;
  NamedModules frozen;
  for (Component c : kAllComponents) {
    auto m = load_local_module(cfg, ctx.paths, c, {Stage::kSketchAe, Stage::kAlign, Stage::kLd});
    m.eval();
    modules.emplace(c, std::move(m));
  }
  for (auto& [c, m] : modules) {
    for (Stage s : {Stage::kSketchAe, Stage::kAlign, Stage::kLd}) {
      for (auto [name, mod] : stage_modules(m, s)) {
        set_trainable(*mod, false);
        frozen.emplace_back(std::string(component_name(c)) + "/" + name, mod);
      }
    }
  }
  StageReport report;
  report.owner = "fusion";
  report.stage = Stage::kGf;
  report.frozen_before = hashes(frozen);

  torch::manual_seed(derive_seed(cfg.seed, {"init", "fusion", "net"}));
  FusionNet net(fusion_options(cfg));
  torch::manual_seed(derive_seed(cfg.seed, {"init", "fusion", "discriminator"}));
  MultiScaleDiscriminator disc(discriminator_options(cfg));
  auto opt_g = make_adam(params_of({net.get()}), cfg.optim);
  auto opt_d = make_adam(params_of({disc.get()}), cfg.optim);
  StageMeta meta;
  meta.latent_channels = cfg.net.embedding_channels;
  meta.latent_stride = 1;
  meta.latent_h = meta.latent_w = cfg.resolution;
  StageRun run(ctx, "fusion", Stage::kGf, ctx.paths.fusion_dir(), fusion_modules(net, disc), meta,
               cfg.iterations.gf);
  run.add_optimizer("adam_g", opt_g);
  run.add_optimizer("adam_d", opt_d);
  report.start_iteration = run.begin();
  LossLog log(ctx.paths.log("fusion", Stage::kGf),
              {"sketch_source", "adv", "fm", "vgg", "disc", "total"}, report.start_iteration);

  const auto n = ctx.train.size();
  check_pairs(n, "fusion");
  EpochSampler sampler(n, derive_seed(cfg.seed, {"sample", "fusion", "gf"}));
  const auto layout = cfg.layout();
  const auto& fw = cfg.weights.fusion;

  run.run(log, report.start_iteration, [&](int it) {
    const auto idx = draw(sampler, it, cfg.optim.batch_size);
    const auto photo = ctx.train.images().index_select(0, idx);
    const auto source = geometry_coin(cfg.seed, "fusion", it);
    torch::Tensor canvas;
    {
      torch::NoGradGuard no_grad;
      const auto geometry = source == GeometrySource::kSketch
                                ? ctx.train.sketches().index_select(0, idx)
                                : photo;
      canvas = codes_to_canvas(modules, encode_face(modules, geometry, photo, layout), layout).data;
    }
    const auto out = net->forward(canvas);

    set_trainable(*disc, false);
    std::vector<ScaleOutput> real;
    {
      torch::NoGradGuard no_grad;
      real = disc->forward(photo);
    }
    const auto fake = disc->forward(out);
    const auto adv = least_squares_term(fake, 1.0);
    const auto fm = feature_matching_loss(real, fake);
    const auto vgg = perceptual_loss(photo, out, ctx.perceptual);
    const auto total = fw[0] * adv + fw[1] * fm + fw[2] * vgg;
    opt_g.zero_grad();
    total.backward();
    opt_g.step();

    set_trainable(*disc, true);
    opt_d.zero_grad();
    const auto d_loss = 0.5 * (least_squares_term(disc->forward(photo), 1.0) +
                               least_squares_term(disc->forward(out.detach()), 0.0));
    d_loss.backward();
    opt_d.step();
    return std::vector<double>{source == GeometrySource::kSketch ? 1.0 : 0.0,
                               adv.item<double>(),
                               fm.item<double>(),
                               vgg.item<double>(),
                               d_loss.item<double>(),
                               total.item<double>()};
  });
  report.end_iteration = cfg.iterations.gf;
  report.frozen_after = hashes(frozen);
  write_bundle_manifest(ctx.paths.checkpoints(), cfg);
  return report;
}

fs::path report_path(const RunPaths& paths, const std::string& owner, Stage s) {
  return paths.root() / "reports" / owner / (std::string(stage_name(s)) + ".json");
}

void write_report(const RunPaths& paths, const StageReport& report) {
  const auto path = report_path(paths, report.owner, report.stage);
  if (report.start_iteration >= report.end_iteration && fs::exists(path)) return;
  nlohmann::json j;
  j["owner"] = report.owner;
  j["stage"] = stage_name(report.stage);
  j["start_iteration"] = report.start_iteration;
  j["end_iteration"] = report.end_iteration;
  j["frozen_before"] = report.frozen_before;
  j["frozen_after"] = report.frozen_after;
  j["metrics"] = report.metrics;
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::trunc) << j.dump(2) << '\n';
}

StageReport read_report(const RunPaths& paths, const std::string& owner, Stage s) {
  const auto path = report_path(paths, owner, s);
  std::ifstream in(path);
  if (!in) throw CheckpointError("missing stage report " + path.string());
  const auto j = nlohmann::json::parse(in);
  StageReport r;
  r.owner = j.at("owner").get<std::string>();
  r.stage = s;
  r.start_iteration = j.at("start_iteration").get<int>();
  r.end_iteration = j.at("end_iteration").get<int>();
  r.frozen_before = j.at("frozen_before").get<std::map<std::string, std::uint64_t>>();
  r.frozen_after = j.at("frozen_after").get<std::map<std::string, std::uint64_t>>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  return r;
}

}  // namespace facedit
