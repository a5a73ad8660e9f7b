#include "facedit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "facedit/hashing.hpp"
#include "facedit/log.hpp"
#include "facedit/raster.hpp"

namespace facedit {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

}  // namespace

std::string_view split_name(Split s) { return s == Split::kTrain ? "train" : "test"; }

void SketchImagePair::validate(int resolution) const {
  if (image.dim() != 3 || image.size(0) != 3) throw ShapeError(id + ": image must be 3xHxW");
  if (sketch.dim() != 3 || sketch.size(0) != 1) throw ShapeError(id + ": sketch must be 1xHxW");
  if (image.size(1) != sketch.size(1) || image.size(2) != sketch.size(2)) {
    throw ShapeError(id + ": image and sketch sizes differ");
  }
  if (image.size(1) != resolution || image.size(2) != resolution) {
    throw ShapeError(id + ": expected " + std::to_string(resolution) + "px square raster");
  }
  const bool binary = torch::logical_or(sketch == 0, sketch == 1).all().item<bool>();
  if (!binary) throw InvalidInput(id + ": sketch is not binary");
}

DatasetManifest::DatasetManifest(fs::path root, std::vector<ManifestEntry> entries,
                                 RunConfig settings)
    : root_(std::move(root)), entries_(std::move(entries)), settings_(std::move(settings)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.id).second) throw InvalidInput("duplicate id '" + e.id + "' in manifest");
  }
}

std::vector<ManifestEntry> DatasetManifest::split(Split s) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
               [s](const ManifestEntry& e) { return e.split == s; });
  return out;
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [s](const ManifestEntry& e) { return e.split == s; }));
}

void DatasetManifest::save() const {
  fs::create_directories(root_);
  std::ofstream out(root_ / kManifestFile, std::ios::binary);
  if (!out) throw ImageIoError("cannot write manifest in " + root_.string());
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["image"] = e.image.generic_string();
    j["sketch"] = e.sketch.generic_string();
    j["split"] = split_name(e.split);
    out << j.dump() << '\n';
  }
  save_run_config(settings_, root_ / kSettingsFile);
}

DatasetManifest DatasetManifest::load(const fs::path& dir) {
  std::ifstream in(dir / kManifestFile);
  if (!in) throw ImageIoError("no manifest at " + (dir / kManifestFile).string());
  RunConfig settings = fs::exists(dir / kSettingsFile) ? load_run_config(dir / kSettingsFile)
                                                       : RunConfig::desk();
  std::vector<ManifestEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.image = j.at("image").get<std::string>();
      e.sketch = j.at("sketch").get<std::string>();
      const auto split = j.at("split").get<std::string>();
      if (split != "train" && split != "test") throw InvalidInput("bad split '" + split + "'");
      e.split = split == "train" ? Split::kTrain : Split::kTest;
      for (const auto& p : {e.image, e.sketch}) {
        if (!fs::exists(dir / p)) throw InvalidInput("missing file " + (dir / p).string());
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw InvalidInput("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return DatasetManifest(dir, std::move(entries), std::move(settings));
}

std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids, double fraction,
                                           std::uint64_t seed) {
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  ranked.reserve(ids.size());
  for (const auto& id : ids) {
    Fnv1a h;
    h.update_value(seed);
    h.update(id);
    ranked.emplace_back(h.digest(), id);
  }
  std::sort(ranked.begin(), ranked.end());
  const auto n_train = static_cast<std::size_t>(std::lround(fraction * ids.size()));
  std::map<std::string, Split> out;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out[ranked[i].second] = i < n_train ? Split::kTrain : Split::kTest;
  }
  return out;
}

DatasetManifest build_dataset(const fs::path& image_dir, const fs::path& out_dir,
                              const BuildOptions& opts) {
  const RunConfig& cfg = opts.settings;
  cfg.validate();
  if (!fs::is_directory(image_dir)) {
    throw InvalidInput("image directory " + image_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(image_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInput("no images found in " + image_dir.string());

  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "sketches");

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    if (!seen.insert(id).second) {
      log::warn(log::cat("skipping ", file.string(), ": id '", id, "' already used"));
      continue;
    }
    cv::Mat raw = cv::imread(file.string(), cv::IMREAD_COLOR);
    if (raw.empty()) {
      log::warn("skipping unreadable image " + file.string());
      continue;
    }
    if (std::min(raw.rows, raw.cols) < cfg.sketch.min_resolution) {
      log::warn(log::cat("skipping ", file.string(), ": smaller than ",
                         cfg.sketch.min_resolution, " px"));
      continue;
    }
    const auto image = mat_to_tensor(square_resize(raw, cfg.resolution));
    const auto sketch = extract_sketch(image, cfg.sketch);
    ManifestEntry e;
    e.id = id;
    e.image = fs::path("images") / (id + ".png");
    e.sketch = fs::path("sketches") / (id + ".png");
    write_png(out_dir / e.image, image);
    write_png(out_dir / e.sketch, sketch);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw InvalidInput("no usable images in " + image_dir.string());

  std::vector<std::string> ids;
  for (const auto& e : entries) ids.push_back(e.id);
  const auto splits = assign_splits(ids, cfg.split_fraction, cfg.seed);
  for (auto& e : entries) e.split = splits.at(e.id);
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });

  DatasetManifest manifest(out_dir, std::move(entries), cfg);
  manifest.save();
  log::info(log::cat("dataset: ", manifest.count(Split::kTrain), " train / ",
                     manifest.count(Split::kTest), " test pairs at ", cfg.resolution, "px"));
  return manifest;
}

std::map<Component, torch::Tensor> crop_components(const torch::Tensor& raster,
                                                   const ComponentLayout& layout) {
  if (raster.size(-1) != layout.canvas() || raster.size(-2) != layout.canvas()) {
    throw ConfigError("raster is not " + std::to_string(layout.canvas()) + "px square");
  }
  std::map<Component, torch::Tensor> out;
  for (Component c : kAllComponents) out[c] = crop(raster, layout.window(c));
  return out;
}

torch::Tensor paste_components(const std::map<Component, torch::Tensor>& crops,
                               const ComponentLayout& layout) {
  auto canvas = crops.at(Component::kBackground).clone();
  for (Component c : kFusionOrder) {
    if (const auto it = crops.find(c); it != crops.end()) paste(canvas, it->second, layout.window(c));
  }
  return canvas;
}

PairStore::PairStore(const DatasetManifest& manifest, Split split) {
  const auto entries = manifest.split(split);
  std::vector<torch::Tensor> images;
  std::vector<torch::Tensor> sketches;
  for (const auto& e : entries) {
    SketchImagePair p{e.id, read_png(manifest.root() / e.image, 3),
                      read_png(manifest.root() / e.sketch, 1)};
    p.sketch = (p.sketch >= 0.5).to(torch::kFloat32);
    p.validate(manifest.resolution());
    ids_.push_back(e.id);
    images.push_back(p.image);
    sketches.push_back(p.sketch);
  }
  if (!images.empty()) {
    images_ = torch::stack(images);
    sketches_ = torch::stack(sketches);
  }
}

PairStore::PairStore(std::vector<std::string> ids, torch::Tensor images, torch::Tensor sketches)
    : ids_(std::move(ids)), images_(std::move(images)), sketches_(std::move(sketches)) {
  if (images_.size(0) != static_cast<std::int64_t>(ids_.size()) ||
      sketches_.size(0) != images_.size(0)) {
    throw ShapeError("pair store: ids, images and sketches disagree in count");
  }
}

SketchImagePair PairStore::pair(std::int64_t i) const {
  return {ids_.at(static_cast<std::size_t>(i)), images_[i], sketches_[i]};
}

}  // namespace facedit
