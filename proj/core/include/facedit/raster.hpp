#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

#include "facedit/layout.hpp"

namespace facedit {

// Rasters are float32 tensors laid out C x H x W with values in [0, 1].
// Photos carry 3 channels in RGB order; sketches carry 1 channel where
// 1 is white background and 0 is a stroke.

/// 8-bit BGR/gray cv::Mat -> C x H x W float tensor (RGB order for colour input).
torch::Tensor mat_to_tensor(const cv::Mat& mat);
/// C x H x W float tensor in [0,1] -> 8-bit BGR or gray cv::Mat.
cv::Mat tensor_to_mat(const torch::Tensor& raster);

torch::Tensor read_png(const std::filesystem::path& path, int channels);
void write_png(const std::filesystem::path& path, const torch::Tensor& raster);

std::vector<std::uint8_t> encode_png(const torch::Tensor& raster);
torch::Tensor decode_png(std::span<const std::uint8_t> bytes, int channels);
torch::Tensor decode_png(const std::string& bytes, int channels);

/// Centre-crops to a square and resizes with area interpolation.
cv::Mat square_resize(const cv::Mat& mat, int side);

/// Rec. 601 luma of an RGB raster, 1 x H x W.
torch::Tensor luminance(const torch::Tensor& rgb);

/// Pixel-exact sub-window of a C x H x W (or N x C x H x W) raster.
torch::Tensor crop(const torch::Tensor& raster, const Window& w);
/// Writes `patch` into `canvas` at `w` (in place).
void paste(torch::Tensor& canvas, const torch::Tensor& patch, const Window& w);

}  // namespace facedit
