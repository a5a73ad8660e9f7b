#include "facedit/sketch.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>
#include <opencv2/ximgproc.hpp>

#include "facedit/errors.hpp"
#include "facedit/raster.hpp"

namespace facedit {

int SketchParams::line_width_at(int side) const {
  return std::max(1, static_cast<int>(std::lround(side / reference_resolution)));
}

torch::Tensor extract_sketch(const torch::Tensor& rgb, const SketchParams& params) {
  if (rgb.dim() != 3 || rgb.size(0) != 3) throw ShapeError("extract_sketch expects 3xHxW RGB");
  const auto d = rgb.to(torch::kFloat64);
  const auto luma =
      0.299 * d.select(0, 0) + 0.587 * d.select(0, 1) + 0.114 * d.select(0, 2);
  return extract_sketch_from_luminance(luma.unsqueeze(0), params);
}

torch::Tensor extract_sketch_from_luminance(const torch::Tensor& luma,
                                            const SketchParams& params) {
  if (luma.dim() != 3 || luma.size(0) != 1) {
    throw ShapeError("extract_sketch expects a 1xHxW luminance raster");
  }
  const int h = static_cast<int>(luma.size(1));
  const int w = static_cast<int>(luma.size(2));
  if (std::min(h, w) < params.min_resolution) {
    throw InvalidInput("image " + std::to_string(w) + "x" + std::to_string(h) +
                       " is below the minimum sketch resolution " +
                       std::to_string(params.min_resolution));
  }

  auto y = luma.to(torch::kFloat64).contiguous();
  cv::Mat Y(h, w, CV_64FC1, y.data_ptr<double>());
  const double sigma = params.sigma_at(std::min(h, w));
  cv::Mat g1, g2;
  cv::GaussianBlur(Y, g1, cv::Size(0, 0), sigma, sigma, cv::BORDER_REPLICATE);
  cv::GaussianBlur(Y, g2, cv::Size(0, 0), params.k * sigma, params.k * sigma,
                   cv::BORDER_REPLICATE);

  // 255 where a stroke survives binarization.
  cv::Mat strokes(h, w, CV_8UC1, cv::Scalar(0));
  for (int r = 0; r < h; ++r) {
    const double* a = g1.ptr<double>(r);
    const double* b = g2.ptr<double>(r);
    auto* out = strokes.ptr<std::uint8_t>(r);
    for (int c = 0; c < w; ++c) {
      const double dog = a[c] - b[c];
      const double t =
          dog >= -params.epsilon ? 1.0 : 1.0 + std::tanh(params.phi * (dog + params.epsilon));
      out[c] = t < params.binarize_threshold ? 255 : 0;
    }
  }

  if (params.thinning) {
    cv::Mat skeleton;
    cv::ximgproc::thinning(strokes, skeleton, cv::ximgproc::THINNING_ZHANGSUEN);
    const int width = params.line_width_at(std::min(h, w));
    if (width > 1) {
      const auto kernel =
          cv::getStructuringElement(cv::MORPH_ELLIPSE, cv::Size(width, width));
      cv::dilate(skeleton, strokes, kernel);
    } else {
      strokes = skeleton;
    }
  }

  cv::Mat white;
  cv::compare(strokes, 0, white, cv::CMP_EQ);  // 255 on background
  return mat_to_tensor(white);
}

double stroke_fraction(const torch::Tensor& sketch) {
  return 1.0 - sketch.to(torch::kFloat64).mean().item<double>();
}

}  // namespace facedit
