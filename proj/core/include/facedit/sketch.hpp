#pragma once

#include <torch/torch.h>

namespace facedit {

/// Extended difference-of-Gaussians line extraction.
///
/// Luminance Y is blurred at sigma and k*sigma; the band-pass response
/// D = G_sigma(Y) - G_{k sigma}(Y) is soft-thresholded into
/// T = 1 where D >= -epsilon, else 1 + tanh(phi * (D + epsilon)),
/// binarized at `binarize_threshold`, optionally thinned to one-pixel
/// skeletons and re-drawn at a uniform line width.
///
/// `sigma` is specified at `reference_resolution`; both the blur scale and the
/// redrawn line width grow linearly with the input side.
struct SketchParams {
  double sigma = 0.8;
  double k = 1.6;
  double phi = 200.0;
  double epsilon = 0.01;
  double reference_resolution = 128.0;
  double binarize_threshold = 0.5;
  bool thinning = true;
  int min_resolution = 64;

  [[nodiscard]] double sigma_at(int side) const { return sigma * side / reference_resolution; }
  [[nodiscard]] int line_width_at(int side) const;
};

/// RGB raster (3 x H x W, [0,1]) -> binary sketch (1 x H x W, 1 = white, 0 = stroke).
/// Depends on the input only through its luminance.
torch::Tensor extract_sketch(const torch::Tensor& rgb, const SketchParams& params = {});

/// Same pipeline starting from a 1 x H x W luminance raster.
torch::Tensor extract_sketch_from_luminance(const torch::Tensor& luma,
                                            const SketchParams& params = {});

/// Fraction of stroke pixels in a binary sketch.
double stroke_fraction(const torch::Tensor& sketch);

}  // namespace facedit
