#pragma once

#include <map>

#include "facedit/checkpoint.hpp"
#include "facedit/config.hpp"
#include "facedit/dataset.hpp"
#include "facedit/engine.hpp"

namespace facedit {

/// Per-pixel L1 between the first `count` train sketches of a component and
/// their autoencoder reconstructions.
double sketch_autoencoder_l1(const RunConfig& cfg, const RunPaths& paths, Component c,
                             const PairStore& train, int count);

/// Per-pixel L1 between generate(sketch(A), A) and A over the first `count` pairs.
double sketch_reconstruction_l1(const Engine& engine, const PairStore& pairs, int count);

/// Per-pixel L1 between reconstruct(A) (photo geometry) and A.
double photo_reconstruction_l1(const Engine& engine, const PairStore& pairs, int count);

}  // namespace facedit
