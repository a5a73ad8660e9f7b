#pragma once

#include <cstdint>
#include <filesystem>

#include <opencv2/core.hpp>

namespace facedit {

/// Procedural, roughly aligned frontal portraits. Used to build smoke-test and
/// acceptance corpora when no photo dataset is available. Facial parts are placed
/// near the default component windows with per-face jitter; colours, shapes and
/// lighting vary with the seed.
struct SyntheticFaceOptions {
  int side = 128;
  int supersample = 4;
  double noise = 0.015;
};

/// Renders face number `index` of the family identified by `seed` (8-bit BGR).
cv::Mat render_synthetic_face(std::uint64_t seed, int index,
                              const SyntheticFaceOptions& opts = {});

/// Writes `count` faces as face_00000.png, face_00001.png, ... into `dir`.
void write_synthetic_faces(const std::filesystem::path& dir, int count, std::uint64_t seed,
                           const SyntheticFaceOptions& opts = {});

}  // namespace facedit
