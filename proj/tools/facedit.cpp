// facedit: dataset building, staged training, generation, morphing, evaluation
// and serving from one binary.

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "facedit/config.hpp"
#include "facedit/dataset.hpp"
#include "facedit/engine.hpp"
#include "facedit/errors.hpp"
#include "facedit/evaluation.hpp"
#include "facedit/log.hpp"
#include "facedit/raster.hpp"
#include "facedit/synthetic_faces.hpp"
#include "facedit/training.hpp"

namespace fs = std::filesystem;
using namespace facedit;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
};

RunConfig effective_config(const CommonArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig::desk() : load_run_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "YAML run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Override the configured seed");
  cmd->add_option("--log-level", a.log_level, "trace, debug, info, warn, error or off");
}

torch::Tensor load_rgb(const std::string& path, int resolution) {
  auto image = read_png(path, 3);
  if (image.size(1) == resolution && image.size(2) == resolution) return image;
  return mat_to_tensor(square_resize(tensor_to_mat(image), resolution));
}

torch::Tensor load_sketch(const std::string& path, int resolution) {
  auto s = read_png(path, 1);
  if (s.size(1) != resolution || s.size(2) != resolution) {
    throw InvalidInput("sketch " + path + " is not " + std::to_string(resolution) + "px square");
  }
  return (s >= 0.5).to(torch::kFloat32);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketch-based face geometry/appearance editing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "facedit 0.3.0");

  // dataset
  CommonArgs ds_common;
  std::string ds_images;
  std::string ds_out;
  int ds_synthetic = 0;
  std::optional<int> ds_resolution;
  std::optional<double> ds_split;
  auto* ds = app.add_subcommand("dataset", "Extract sketches and write a manifest");
  add_common(ds, ds_common);
  ds->add_option("--images", ds_images, "Directory of face photos");
  ds->add_option("--out", ds_out, "Output dataset directory")->required();
  ds->add_option("--synthetic", ds_synthetic,
                 "Render N procedural faces into <out>/raw and build from them")
      ->check(CLI::PositiveNumber);
  ds->add_option("--resolution", ds_resolution, "Square output resolution");
  ds->add_option("--split", ds_split, "Train fraction");

  // train
  CommonArgs tr_common;
  std::string tr_stage;
  std::string tr_data;
  std::string tr_out;
  std::vector<std::string> tr_components;
  std::optional<int> tr_iterations;
  bool tr_resume = false;
  auto* tr = app.add_subcommand("train", "Run one training stage (ae, align, ld, gf)");
  add_common(tr, tr_common);
  tr->add_option("stage", tr_stage, "ae | align | ld | gf")
      ->required()
      ->check(CLI::IsMember({"ae", "align", "ld", "gf"}));
  tr->add_option("--data", tr_data, "Dataset directory")->required();
  tr->add_option("--out", tr_out, "Run directory")->required();
  tr->add_option("--component", tr_components, "Restrict to components (default: config list)");
  tr->add_option("--iterations", tr_iterations, "Override the stage iteration count");
  tr->add_flag("--resume", tr_resume, "Continue from saved optimizer state");

  // generate
  std::string gen_bundle;
  std::string gen_sketch;
  std::string gen_geometry;
  std::string gen_appearance;
  std::string gen_out;
  std::string gen_log = "warn";
  auto* gen = app.add_subcommand("generate", "Render a face from a geometry source and an appearance photo");
  gen->add_option("--bundle", gen_bundle, "Run or checkpoints directory")->required();
  auto* sk = gen->add_option("--sketch", gen_sketch, "Binary sketch PNG");
  auto* gi = gen->add_option("--geometry-image", gen_geometry, "Photo used as geometry source");
  sk->excludes(gi);
  gen->add_option("--appearance", gen_appearance, "Appearance photo")->required();
  gen->add_option("--out", gen_out, "Output PNG")->required();
  gen->add_option("--log-level", gen_log);

  // morph
  std::string mo_bundle;
  std::string mo_a;
  std::string mo_b;
  std::string mo_out;
  double mo_tg = 0.5;
  double mo_ta = 0.5;
  std::vector<int> mo_grid;
  std::string mo_log = "warn";
  auto* mo = app.add_subcommand("morph", "Interpolate geometry and appearance between two photos");
  mo->add_option("--bundle", mo_bundle)->required();
  mo->add_option("--a", mo_a, "First photo")->required();
  mo->add_option("--b", mo_b, "Second photo")->required();
  mo->add_option("--out", mo_out, "Output PNG")->required();
  mo->add_option("--t-geom", mo_tg)->check(CLI::Range(0.0, 1.0));
  mo->add_option("--t-app", mo_ta)->check(CLI::Range(0.0, 1.0));
  mo->add_option("--grid", mo_grid, "n_geom n_app: write the full interpolation grid")
      ->expected(2);
  mo->add_option("--log-level", mo_log);

  // eval
  std::string ev_bundle;
  std::string ev_data;
  int ev_count = 10;
  auto* ev = app.add_subcommand("eval", "Reconstruction metrics of a trained run");
  ev->add_option("--bundle", ev_bundle, "Run directory")->required();
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--count", ev_count, "Number of train pairs")->check(CLI::PositiveNumber);

  // config
  CommonArgs cf_common;
  auto* cf = app.add_subcommand("config", "Print the effective configuration");
  add_common(cf, cf_common);

  auto serve = cli::add_serve_command(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (*ds) {
      log::set_level(ds_common.log_level);
      auto cfg = effective_config(ds_common);
      if (ds_resolution) cfg.resolution = *ds_resolution;
      if (ds_split) cfg.split_fraction = *ds_split;
      cfg.validate();
      fs::path images = ds_images;
      if (ds_synthetic > 0) {
        images = fs::path(ds_out) / "raw";
        SyntheticFaceOptions opts;
        opts.side = cfg.resolution;
        write_synthetic_faces(images, ds_synthetic, cfg.seed, opts);
      } else if (images.empty()) {
        std::cerr << "dataset: --images or --synthetic is required\n";
        return cli::kUsage;
      }
      build_dataset(images, ds_out, BuildOptions{cfg});
      return cli::kOk;
    }
    if (*tr) {
      log::set_level(tr_common.log_level);
      auto cfg = effective_config(tr_common);
      if (!tr_components.empty()) {
        cfg.components.clear();
        for (const auto& name : tr_components) {
          const auto c = parse_component(name);
          if (!c) throw ConfigError("unknown component '" + name + "'");
          cfg.components.push_back(*c);
        }
      }
      const auto stage = *parse_stage(tr_stage);
      if (tr_iterations) {
        switch (stage) {
          case Stage::kSketchAe: cfg.iterations.ae = *tr_iterations; break;
          case Stage::kAlign: cfg.iterations.align = *tr_iterations; break;
          case Stage::kLd: cfg.iterations.ld = *tr_iterations; break;
          case Stage::kGf: cfg.iterations.gf = *tr_iterations; break;
        }
      }
      // Ordering is checked before any data is loaded.
      require_prerequisites(RunPaths(tr_out), cfg, stage);
      auto ctx = open_training(cfg, tr_data, tr_out, tr_resume);
      switch (stage) {
        case Stage::kSketchAe:
          for (Component c : cfg.components) write_report(ctx.paths, train_sketch_autoencoder(ctx, c));
          break;
        case Stage::kAlign:
          for (Component c : cfg.components) write_report(ctx.paths, train_image_alignment(ctx, c));
          break;
        case Stage::kLd:
          for (const auto& r : train_all_components(ctx)) write_report(ctx.paths, r);
          break;
        case Stage::kGf:
          write_report(ctx.paths, train_gf(ctx));
          break;
      }
      return cli::kOk;
    }
    if (*gen) {
      log::set_level(gen_log);
      if (gen_sketch.empty() == gen_geometry.empty()) {
        std::cerr << "generate: give exactly one of --sketch or --geometry-image\n";
        return cli::kUsage;
      }
      const auto engine = Engine::load(gen_bundle);
      const int res = engine->resolution();
      const auto geometry = gen_sketch.empty() ? load_rgb(gen_geometry, res)
                                               : load_sketch(gen_sketch, res);
      write_png(gen_out, engine->generate(geometry, load_rgb(gen_appearance, res)));
      return cli::kOk;
    }
    if (*mo) {
      log::set_level(mo_log);
      const auto engine = Engine::load(mo_bundle);
      const int res = engine->resolution();
      const auto a = load_rgb(mo_a, res);
      const auto b = load_rgb(mo_b, res);
      if (!mo_grid.empty()) {
        write_png(mo_out, engine->morph_grid(a, b, mo_grid[0], mo_grid[1]));
      } else {
        write_png(mo_out, engine->morph(a, b, mo_tg, mo_ta));
      }
      return cli::kOk;
    }
    if (*ev) {
      const auto engine = Engine::load(ev_bundle);
      const auto manifest = DatasetManifest::load(ev_data);
      const PairStore train(manifest, Split::kTrain);
      const RunPaths paths(fs::exists(fs::path(ev_bundle) / "checkpoints") ? fs::path(ev_bundle)
                                                                            : fs::path(ev_bundle).parent_path());
      nlohmann::ordered_json out;
      for (Component c : kAllComponents) {
        out["sketch_ae_l1"][std::string(component_name(c))] =
            sketch_autoencoder_l1(engine->config(), paths, c, train, ev_count);
      }
      out["sketch_reconstruction_l1"] = sketch_reconstruction_l1(*engine, train, ev_count);
      out["photo_reconstruction_l1"] = photo_reconstruction_l1(*engine, train, ev_count);
      std::cout << out.dump(2) << '\n';
      return cli::kOk;
    }
    if (*cf) {
      std::cout << dump_run_config(effective_config(cf_common));
      return cli::kOk;
    }
    return serve();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const StageOrderError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const TrainingAborted& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return cli::kTrainingAborted;
  } catch (const c10::Error& e) {
    std::cerr << "error: " << e.what_without_backtrace() << '\n';
    return cli::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDataError;
  }
}
