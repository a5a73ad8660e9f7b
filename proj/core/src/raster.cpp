#include "facedit/raster.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace facedit {

namespace {
void check_window(const torch::Tensor& raster, const Window& w) {
  const auto h = raster.size(-2);
  const auto wd = raster.size(-1);
  if (!w.within(static_cast<int>(wd), static_cast<int>(h))) {
    throw ConfigError("window (" + std::to_string(w.x) + "," + std::to_string(w.y) + "," +
                      std::to_string(w.w) + "," + std::to_string(w.h) + ") outside " +
                      std::to_string(wd) + "x" + std::to_string(h) + " raster");
  }
}
}  // namespace

torch::Tensor mat_to_tensor(const cv::Mat& mat) {
  if (mat.empty()) throw ImageIoError("empty image");
  cv::Mat m8;
  if (mat.depth() != CV_8U) {
    mat.convertTo(m8, CV_8U);
  } else {
    m8 = mat;
  }
  cv::Mat rgb;
  switch (m8.channels()) {
    case 1: rgb = m8; break;
    case 3: cv::cvtColor(m8, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(m8, rgb, cv::COLOR_BGRA2RGB); break;
    default: throw ImageIoError("unsupported channel count " + std::to_string(m8.channels()));
  }
  rgb = rgb.isContinuous() ? rgb : rgb.clone();
  auto t = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, rgb.channels()}, torch::kUInt8)
               .clone();
  return t.permute({2, 0, 1}).to(torch::kFloat32).div_(255.0).contiguous();
}

cv::Mat tensor_to_mat(const torch::Tensor& raster) {
  if (raster.dim() != 3 || (raster.size(0) != 1 && raster.size(0) != 3)) {
    throw ShapeError("expected a 1xHxW or 3xHxW raster");
  }
  auto hwc = raster.detach()
                 .to(torch::kCPU, torch::kFloat32)
                 .clamp(0.0, 1.0)
                 .mul(255.0)
                 .round()
                 .to(torch::kUInt8)
                 .permute({1, 2, 0})
                 .contiguous();
  const int c = static_cast<int>(hwc.size(2));
  cv::Mat m(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC(c),
            hwc.data_ptr<std::uint8_t>());
  cv::Mat out;
  if (c == 3) {
    cv::cvtColor(m, out, cv::COLOR_RGB2BGR);
  } else {
    out = m.clone();
  }
  return out;
}

torch::Tensor read_png(const std::filesystem::path& path, int channels) {
  const int flag = channels == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR;
  cv::Mat m = cv::imread(path.string(), flag);
  if (m.empty()) throw ImageIoError("cannot read image " + path.string());
  return mat_to_tensor(m);
}

void write_png(const std::filesystem::path& path, const torch::Tensor& raster) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), tensor_to_mat(raster))) {
    throw ImageIoError("cannot write image " + path.string());
  }
}

std::vector<std::uint8_t> encode_png(const torch::Tensor& raster) {
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".png", tensor_to_mat(raster), bytes)) {
    throw ImageIoError("PNG encoding failed");
  }
  return bytes;
}

torch::Tensor decode_png(std::span<const std::uint8_t> bytes, int channels) {
  if (bytes.empty()) throw ImageIoError("empty image payload");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(bytes.data()));
  const int flag = channels == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR;
  cv::Mat m = cv::imdecode(buf, flag);
  if (m.empty()) throw ImageIoError("payload is not a decodable image");
  return mat_to_tensor(m);
}

torch::Tensor decode_png(const std::string& bytes, int channels) {
  return decode_png(std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()),
                    channels);
}

cv::Mat square_resize(const cv::Mat& mat, int side) {
  const int s = std::min(mat.rows, mat.cols);
  cv::Rect roi((mat.cols - s) / 2, (mat.rows - s) / 2, s, s);
  cv::Mat square = mat(roi);
  if (s == side) return square.clone();
  cv::Mat out;
  cv::resize(square, out, cv::Size(side, side), 0, 0,
             s > side ? cv::INTER_AREA : cv::INTER_CUBIC);
  return out;
}

torch::Tensor luminance(const torch::Tensor& rgb) {
  if (rgb.size(-3) == 1) return rgb;
  return (0.299 * rgb.select(-3, 0) + 0.587 * rgb.select(-3, 1) + 0.114 * rgb.select(-3, 2))
      .unsqueeze(-3);
}

torch::Tensor crop(const torch::Tensor& raster, const Window& w) {
  check_window(raster, w);
  return raster.narrow(-2, w.y, w.h).narrow(-1, w.x, w.w);
}

void paste(torch::Tensor& canvas, const torch::Tensor& patch, const Window& w) {
  check_window(canvas, w);
  if (patch.size(-2) != w.h || patch.size(-1) != w.w) {
    throw ShapeError("patch " + std::to_string(patch.size(-1)) + "x" +
                     std::to_string(patch.size(-2)) + " does not fit window " +
                     std::to_string(w.w) + "x" + std::to_string(w.h));
  }
  canvas.narrow(-2, w.y, w.h).narrow(-1, w.x, w.w).copy_(patch);
}

}  // namespace facedit
