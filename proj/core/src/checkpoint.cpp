#include "facedit/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "facedit/errors.hpp"
#include "facedit/hashing.hpp"
#include "facedit/param_io.hpp"

namespace facedit {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 4> kStageNames = {"ae", "align", "ld", "gf"};
constexpr std::array<std::string_view, 4> kStageDirs = {"sketch_ae", "image_encoder", "ld",
                                                         "fusion"};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t digest(const std::string& bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.digest();
}

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  }
  return std::nullopt;
}

std::string_view stage_dir_name(Stage s) { return kStageDirs[static_cast<std::size_t>(s)]; }

fs::path RunPaths::stage_dir(Component c, Stage s) const {
  if (s == Stage::kGf) return fusion_dir();
  return checkpoints() / std::string(component_name(c)) / std::string(stage_dir_name(s));
}

fs::path RunPaths::train_state(std::string_view owner, Stage s) const {
  return root_ / "train_state" / std::string(owner) / std::string(stage_name(s));
}

fs::path RunPaths::log(std::string_view owner, Stage s) const {
  return root_ / "logs" / std::string(owner) / (std::string(stage_name(s)) + ".csv");
}

void save_stage(const fs::path& dir, const NamedModules& modules, StageMeta meta) {
  fs::create_directories(dir);
  meta.files.clear();
  for (const auto& [name, module] : modules) {
    meta.files[name] = hex_digest(save_parameters(*module, dir / (name + ".fdpb")));
  }
  nlohmann::ordered_json j;
  j["format_version"] = kBundleFormatVersion;
  j["owner"] = meta.owner;
  j["stage"] = stage_name(meta.stage);
  j["iteration"] = meta.iteration;
  j["target_iterations"] = meta.target_iterations;
  j["seed"] = meta.seed;
  j["latent"] = {{"channels", meta.latent_channels},
                 {"stride", meta.latent_stride},
                 {"h", meta.latent_h},
                 {"w", meta.latent_w}};
  j["files"] = meta.files;
  const auto tmp = dir / "meta.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw CheckpointError("cannot write " + tmp.string());
  }
  fs::rename(tmp, dir / "meta.json");
}

StageMeta read_stage_meta(const fs::path& dir, std::string_view what) {
  if (!fs::exists(dir / "meta.json")) {
    throw CheckpointError("missing checkpoint for " + std::string(what) + " (" + dir.string() +
                          ")");
  }
  StageMeta m;
  try {
    const auto j = nlohmann::json::parse(read_file(dir / "meta.json"));
    if (j.at("format_version").get<int>() != kBundleFormatVersion) {
      throw CheckpointError(std::string(what) + ": checkpoint format version " +
                            std::to_string(j.at("format_version").get<int>()) +
                            " is not supported (expected " +
                            std::to_string(kBundleFormatVersion) + ")");
    }
    m.owner = j.at("owner").get<std::string>();
    const auto stage = parse_stage(j.at("stage").get<std::string>());
    if (!stage) throw CheckpointError(std::string(what) + ": unknown stage in meta.json");
    m.stage = *stage;
    m.iteration = j.at("iteration").get<int>();
    m.target_iterations = j.at("target_iterations").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& l = j.at("latent");
    m.latent_channels = l.at("channels").get<int>();
    m.latent_stride = l.at("stride").get<int>();
    m.latent_h = l.at("h").get<int>();
    m.latent_w = l.at("w").get<int>();
    m.files = j.at("files").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string(what) + ": malformed meta.json: " + e.what());
  }
  return m;
}

StageMeta load_stage(const fs::path& dir, const NamedModules& modules, std::string_view what) {
  auto meta = read_stage_meta(dir, what);
  std::vector<std::string> blobs;
  for (const auto& [name, module] : modules) {
    const auto it = meta.files.find(name);
    const auto path = dir / (name + ".fdpb");
    if (it == meta.files.end() || !fs::exists(path)) {
      throw CheckpointError("missing checkpoint file '" + name + "' for " + std::string(what));
    }
    blobs.push_back(read_file(path));
    if (hex_digest(digest(blobs.back())) != it->second) {
      throw CheckpointError(std::string(what) + ": digest mismatch for '" + name + "'");
    }
  }
  // Validate every blob against a scratch copy before touching live modules.
  std::vector<std::string> restore;
  for (const auto& [name, module] : modules) restore.push_back(serialize_parameters(*module));
  try {
    for (std::size_t i = 0; i < modules.size(); ++i) {
      deserialize_parameters(*modules[i].second, blobs[i]);
    }
  } catch (const CheckpointError& e) {
    for (std::size_t i = 0; i < modules.size(); ++i) {
      deserialize_parameters(*modules[i].second, restore[i]);
    }
    throw CheckpointError(std::string(what) + ": " + e.what());
  }
  return meta;
}

bool stage_complete(const fs::path& dir) {
  if (!fs::exists(dir / "meta.json")) return false;
  try {
    return read_stage_meta(dir, dir.string()).complete();
  } catch (const CheckpointError&) {
    return false;
  }
}

std::uint64_t directory_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end());
  Fnv1a h;
  for (const auto& f : files) {
    h.update(f.generic_string());
    h.update(read_file(dir / f));
  }
  return h.digest();
}

}  // namespace facedit
