#include "facedit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace facedit {

namespace {

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (const auto v = node[key]) {
    try {
      out = v.as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

template <typename T, std::size_t N>
void read_array(const YAML::Node& node, const char* key, std::array<T, N>& out) {
  if (const auto v = node[key]) {
    if (!v.IsSequence() || v.size() != N) {
      throw ConfigError(std::string("'") + key + "' must be a list of " + std::to_string(N) +
                        " values");
    }
    for (std::size_t i = 0; i < N; ++i) out[i] = v[i].as<T>();
  }
}

void reject_unknown(const YAML::Node& node, const std::set<std::string>& known,
                    const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

YAML::Node window_node(const FractionalWindow& w) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  n.push_back(w.x);
  n.push_back(w.y);
  n.push_back(w.w);
  n.push_back(w.h);
  return n;
}

template <typename T, std::size_t N>
YAML::Node flow(const std::array<T, N>& a) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  for (const auto& v : a) n.push_back(v);
  return n;
}

}  // namespace

ComponentLayout RunConfig::layout() const {
  return ComponentLayout::from_fractions(resolution, layout_fractions, net.latent_stride());
}

void RunConfig::validate() const {
  if (resolution <= 0 || resolution % net.latent_stride() != 0) {
    throw ConfigError("resolution must be a positive multiple of " +
                      std::to_string(net.latent_stride()));
  }
  if (static_cast<int>(net.generator_up_channels.size()) != net.down_stages) {
    throw ConfigError("generator_up_channels needs one entry per upsampling stage (" +
                      std::to_string(net.down_stages) + ")");
  }
  if (net.generator_up_channels.back() != net.embedding_channels) {
    throw ConfigError("last generator stage must produce embedding_channels channels");
  }
  if (net.disc_scales < 2) throw ConfigError("disc_scales must be at least 2");
  if (optim.batch_size < 1) throw ConfigError("batch_size must be positive");
  if (split_fraction <= 0.0 || split_fraction > 1.0) {
    throw ConfigError("split_fraction must lie in (0, 1]");
  }
  if (components.empty()) throw ConfigError("component list is empty");
  if (log_every < 1 || checkpoint_every < 1 || smoothing_window < 1) {
    throw ConfigError("log_every, checkpoint_every and smoothing_window must be positive");
  }
  (void)layout();
}

RunConfig RunConfig::desk() { return RunConfig{}; }

RunConfig RunConfig::full() {
  RunConfig c;
  c.resolution = 512;
  c.net.geometry_channels = 256;
  c.net.appearance_channels = 256;
  c.net.encoder_base = 32;
  c.net.appearance_base = 64;
  c.net.generator_up_channels = {256, 128, 64};
  c.net.disc_base = 64;
  c.net.disc_scales = 3;
  c.net.perceptual_base = 64;
  c.net.fusion_base = 64;
  c.iterations = {100000, 100000, 200000, 200000};
  return c;
}

RunConfig parse_run_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig c = RunConfig::desk();
  if (!root || root.IsNull()) return c;
  std::string preset = "desk";
  read(root, "preset", preset);
  if (preset == "full") {
    c = RunConfig::full();
  } else if (preset != "desk") {
    throw ConfigError("preset must be 'desk' or 'full'");
  }
  reject_unknown(root,
                 {"preset", "resolution", "seed", "split_fraction", "components", "layout",
                  "sketch", "network", "weights", "optimizer", "iterations", "log_every", "checkpoint_every",
                  "smoothing_window", "perceptual_weights", "perceptual_seed"},
                 "config");

  read(root, "resolution", c.resolution);
  read(root, "seed", c.seed);
  read(root, "split_fraction", c.split_fraction);
  read(root, "log_every", c.log_every);
  read(root, "checkpoint_every", c.checkpoint_every);
  read(root, "smoothing_window", c.smoothing_window);
  read(root, "perceptual_weights", c.perceptual_weights);
  read(root, "perceptual_seed", c.perceptual_seed);

  if (const auto n = root["components"]) {
    c.components.clear();
    for (const auto& item : n) {
      const auto name = item.as<std::string>();
      const auto comp = parse_component(name);
      if (!comp) throw ConfigError("unknown component '" + name + "'");
      c.components.push_back(*comp);
    }
  }
  if (const auto n = root["layout"]) {
    std::set<std::string> names;
    for (Component comp : kAllComponents) names.insert(std::string(component_name(comp)));
    reject_unknown(n, names, "layout");
    for (Component comp : kAllComponents) {
      std::array<double, 4> v{};
      read_array(n, std::string(component_name(comp)).c_str(), v);
      if (n[std::string(component_name(comp))]) {
        c.layout_fractions[static_cast<std::size_t>(comp)] = {v[0], v[1], v[2], v[3]};
      }
    }
  }
  if (const auto n = root["sketch"]) {
    reject_unknown(n,
                   {"sigma", "k", "phi", "epsilon", "reference_resolution",
                    "binarize_threshold", "thinning", "min_resolution"},
                   "sketch");
    read(n, "sigma", c.sketch.sigma);
    read(n, "k", c.sketch.k);
    read(n, "phi", c.sketch.phi);
    read(n, "epsilon", c.sketch.epsilon);
    read(n, "reference_resolution", c.sketch.reference_resolution);
    read(n, "binarize_threshold", c.sketch.binarize_threshold);
    read(n, "thinning", c.sketch.thinning);
    read(n, "min_resolution", c.sketch.min_resolution);
  }
  if (const auto n = root["network"]) {
    reject_unknown(n,
                   {"down_stages", "geometry_channels", "appearance_channels", "encoder_base",
                    "appearance_base", "sketch_decoder_res_blocks", "generator_res_blocks",
                    "generator_up_channels", "embedding_channels", "disc_base", "disc_scales",
                    "disc_down_layers", "perceptual_base", "fusion_base", "fusion_down",
                    "fusion_res_blocks"},
                   "network");
    auto& net = c.net;
    read(n, "down_stages", net.down_stages);
    read(n, "geometry_channels", net.geometry_channels);
    read(n, "appearance_channels", net.appearance_channels);
    read(n, "encoder_base", net.encoder_base);
    read(n, "appearance_base", net.appearance_base);
    read(n, "sketch_decoder_res_blocks", net.sketch_decoder_res_blocks);
    read(n, "generator_res_blocks", net.generator_res_blocks);
    read(n, "generator_up_channels", net.generator_up_channels);
    read(n, "embedding_channels", net.embedding_channels);
    read(n, "disc_base", net.disc_base);
    read(n, "disc_scales", net.disc_scales);
    read(n, "disc_down_layers", net.disc_down_layers);
    read(n, "perceptual_base", net.perceptual_base);
    read(n, "fusion_base", net.fusion_base);
    read(n, "fusion_down", net.fusion_down);
    read(n, "fusion_res_blocks", net.fusion_res_blocks);
  }
  if (const auto n = root["weights"]) {
    reject_unknown(n, {"alpha", "tau", "gamma", "fusion"}, "weights");
    read_array(n, "alpha", c.weights.alpha);
    read_array(n, "tau", c.weights.tau);
    read_array(n, "gamma", c.weights.gamma);
    read_array(n, "fusion", c.weights.fusion);
  }
  if (const auto n = root["optimizer"]) {
    reject_unknown(n, {"lr", "beta1", "beta2", "batch_size"}, "optimizer");
    read(n, "lr", c.optim.lr);
    read(n, "beta1", c.optim.beta1);
    read(n, "beta2", c.optim.beta2);
    read(n, "batch_size", c.optim.batch_size);
  }
  if (const auto n = root["iterations"]) {
    reject_unknown(n, {"ae", "align", "ld", "gf"}, "iterations");
    read(n, "ae", c.iterations.ae);
    read(n, "align", c.iterations.align);
    read(n, "ld", c.iterations.ld);
    read(n, "gf", c.iterations.gf);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
  YAML::Node root;
  root["resolution"] = c.resolution;
  root["seed"] = c.seed;
  root["split_fraction"] = c.split_fraction;
  YAML::Node comps(YAML::NodeType::Sequence);
  comps.SetStyle(YAML::EmitterStyle::Flow);
  for (Component comp : c.components) comps.push_back(std::string(component_name(comp)));
  root["components"] = comps;
  for (Component comp : kAllComponents) {
    root["layout"][std::string(component_name(comp))] =
        window_node(c.layout_fractions[static_cast<std::size_t>(comp)]);
  }
  auto s = root["sketch"];
  s["sigma"] = c.sketch.sigma;
  s["k"] = c.sketch.k;
  s["phi"] = c.sketch.phi;
  s["epsilon"] = c.sketch.epsilon;
  s["reference_resolution"] = c.sketch.reference_resolution;
  s["binarize_threshold"] = c.sketch.binarize_threshold;
  s["thinning"] = c.sketch.thinning;
  s["min_resolution"] = c.sketch.min_resolution;
  auto n = root["network"];
  n["down_stages"] = c.net.down_stages;
  n["geometry_channels"] = c.net.geometry_channels;
  n["appearance_channels"] = c.net.appearance_channels;
  n["encoder_base"] = c.net.encoder_base;
  n["appearance_base"] = c.net.appearance_base;
  n["sketch_decoder_res_blocks"] = c.net.sketch_decoder_res_blocks;
  n["generator_res_blocks"] = c.net.generator_res_blocks;
  YAML::Node ups(YAML::NodeType::Sequence);
  ups.SetStyle(YAML::EmitterStyle::Flow);
  for (int v : c.net.generator_up_channels) ups.push_back(v);
  n["generator_up_channels"] = ups;
  n["embedding_channels"] = c.net.embedding_channels;
  n["disc_base"] = c.net.disc_base;
  n["disc_scales"] = c.net.disc_scales;
  n["disc_down_layers"] = c.net.disc_down_layers;
  n["perceptual_base"] = c.net.perceptual_base;
  n["fusion_base"] = c.net.fusion_base;
  n["fusion_down"] = c.net.fusion_down;
  n["fusion_res_blocks"] = c.net.fusion_res_blocks;
  auto w = root["weights"];
  w["alpha"] = flow(c.weights.alpha);
  w["tau"] = flow(c.weights.tau);
  w["gamma"] = flow(c.weights.gamma);
  w["fusion"] = flow(c.weights.fusion);
  auto o = root["optimizer"];
  o["lr"] = c.optim.lr;
  o["beta1"] = c.optim.beta1;
  o["beta2"] = c.optim.beta2;
  o["batch_size"] = c.optim.batch_size;
  auto it = root["iterations"];
  it["ae"] = c.iterations.ae;
  it["align"] = c.iterations.align;
  it["ld"] = c.iterations.ld;
  it["gf"] = c.iterations.gf;
  root["log_every"] = c.log_every;
  root["checkpoint_every"] = c.checkpoint_every;
  root["smoothing_window"] = c.smoothing_window;
  root["perceptual_weights"] = c.perceptual_weights;
  root["perceptual_seed"] = c.perceptual_seed;

  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << dump_run_config(cfg);
}

}  // namespace facedit
