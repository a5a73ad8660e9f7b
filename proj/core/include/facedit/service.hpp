#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "facedit/engine.hpp"

namespace facedit {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;         // HTTP; 0 picks a free port
  int stream_port = -1;    // websocket /session; -1 means port + 1, 0 picks a free port
  std::filesystem::path gallery;  // directory of appearance reference PNGs
  int resolution = 128;           // used for sketch extraction when no engine is loaded
};

/// Appearance gallery: every PNG in a directory, keyed by file stem.
class Gallery {
 public:
  Gallery(const std::filesystem::path& dir, int resolution);
  [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
  [[nodiscard]] bool contains(const std::string& id) const;
  /// Raster resized to the model resolution.
  [[nodiscard]] torch::Tensor image(const std::string& id) const;
  /// Original file bytes.
  [[nodiscard]] std::string png(const std::string& id) const;

 private:
  std::filesystem::path dir_;
  int resolution_;
  std::vector<std::string> ids_;
};

/// HTTP one-shot endpoints plus the websocket editing stream.
///   POST /generate        multipart: sketch | geometry_image, appearance | appearance_id
///   POST /disentangle     PNG body or multipart "image" -> JSON codes
///   POST /morph           multipart a, b; fields or query t_geom, t_app -> PNG
///   POST /extract-sketch  PNG body or multipart "image" -> PNG
///   GET  /appearances     JSON list of gallery entries
///   GET  /appearances/{id} PNG
///   ws://host:stream_port/session
class Service {
 public:
  /// `engine` may be null: model routes then answer 503 while sketch
  /// extraction and the gallery stay available.
  Service(std::shared_ptr<const Engine> engine, ServiceOptions opts);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds both ports and serves on background threads.
  void start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  [[nodiscard]] int port() const;
  [[nodiscard]] int stream_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace facedit
