#include "facedit/synthetic_faces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace facedit {

namespace {

class Painter {
 public:
  Painter(cv::Mat& img, double scale) : img_(img), scale_(scale) {}

  cv::Point pt(double fx, double fy) const {
    return {static_cast<int>(fx * scale_ * kShift), static_cast<int>(fy * scale_ * kShift)};
  }
  cv::Size sz(double fw, double fh) const {
    return {static_cast<int>(fw * scale_ * kShift), static_cast<int>(fh * scale_ * kShift)};
  }
  int px(double f) const { return std::max(1, static_cast<int>(f * scale_)); }

  // outline <= 0 fills the ellipse; otherwise it is the stroke width as a canvas fraction.
  void ellipse(double cx, double cy, double ax, double ay, double angle, const cv::Scalar& c,
               double outline = 0.0, double a0 = 0, double a1 = 360) {
    cv::ellipse(img_, pt(cx, cy), sz(ax, ay), angle, a0, a1, c,
                outline <= 0.0 ? cv::FILLED : px(outline), cv::LINE_AA, kShiftBits);
  }
  void line(double x0, double y0, double x1, double y1, const cv::Scalar& c, double width) {
    cv::line(img_, pt(x0, y0), pt(x1, y1), c, px(width), cv::LINE_AA, kShiftBits);
  }
  void curve(const std::vector<std::array<double, 2>>& pts, const cv::Scalar& c, double width) {
    std::vector<cv::Point> p;
    p.reserve(pts.size());
    for (const auto& q : pts) p.push_back(pt(q[0], q[1]));
    cv::polylines(img_, p, false, c, px(width), cv::LINE_AA, kShiftBits);
  }

 private:
  static constexpr int kShiftBits = 4;
  static constexpr int kShift = 1 << kShiftBits;
  cv::Mat& img_;
  double scale_;
};

cv::Scalar bgr(double r, double g, double b) { return {b * 255.0, g * 255.0, r * 255.0}; }

cv::Scalar mix(const cv::Scalar& a, const cv::Scalar& b, double t) {
  return a * (1.0 - t) + b * t;
}

double luma(const cv::Scalar& c) { return (0.114 * c[0] + 0.587 * c[1] + 0.299 * c[2]) / 255.0; }

// Darkens or lightens hair until its luma differs from the skin's by `gap`,
// so the face outline always shows up as an edge.
cv::Scalar contrast_hair(const cv::Scalar& hair, const cv::Scalar& skin, double gap) {
  const double ys = luma(skin);
  const double yh = luma(hair);
  if (std::abs(yh - ys) >= gap) return hair;
  const double target = ys >= gap + 0.05 ? ys - gap : ys + gap;
  const double scale = yh > 0.0 ? target / yh : 1.0;
  cv::Scalar out = hair * scale;
  for (int i = 0; i < 3; ++i) out[i] = std::clamp(out[i], 0.0, 255.0);
  return out;
}

}  // namespace

cv::Mat render_synthetic_face(std::uint64_t seed, int index, const SyntheticFaceOptions& opts) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) * 7919U +
                      1U);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  auto pick = [&](const auto& palette) {
    return palette[static_cast<std::size_t>(u01(rng) * palette.size()) % palette.size()];
  };

  const int big = opts.side * std::max(1, opts.supersample);
  const double s = big;
  cv::Mat img(big, big, CV_8UC3);

  // Background: vertical two-colour gradient.
  const cv::Scalar bg_top = bgr(uni(0.1, 0.9), uni(0.1, 0.9), uni(0.1, 0.9));
  const cv::Scalar bg_bot = bgr(uni(0.1, 0.9), uni(0.1, 0.9), uni(0.1, 0.9));
  for (int y = 0; y < big; ++y) {
    img.row(y).setTo(mix(bg_top, bg_bot, static_cast<double>(y) / big));
  }

  Painter p(img, s);
  static const std::array<cv::Scalar, 6> kSkin = {
      bgr(0.96, 0.80, 0.69), bgr(0.92, 0.72, 0.58), bgr(0.80, 0.60, 0.45),
      bgr(0.65, 0.46, 0.33), bgr(0.45, 0.31, 0.22), bgr(0.98, 0.86, 0.78)};
  static const std::array<cv::Scalar, 6> kHair = {
      bgr(0.08, 0.06, 0.05), bgr(0.30, 0.18, 0.10), bgr(0.55, 0.38, 0.20),
      bgr(0.85, 0.72, 0.45), bgr(0.55, 0.55, 0.55), bgr(0.60, 0.20, 0.08)};
  static const std::array<cv::Scalar, 5> kIris = {
      bgr(0.25, 0.15, 0.08), bgr(0.20, 0.40, 0.70), bgr(0.25, 0.50, 0.30),
      bgr(0.45, 0.35, 0.20), bgr(0.35, 0.40, 0.45)};
  static const std::array<cv::Scalar, 4> kLips = {
      bgr(0.75, 0.35, 0.38), bgr(0.62, 0.28, 0.30), bgr(0.85, 0.50, 0.50), bgr(0.50, 0.25, 0.25)};

  const cv::Scalar skin = mix(pick(kSkin), bgr(uni(0.3, 1), uni(0.3, 1), uni(0.3, 1)), 0.08);
  const cv::Scalar skin_shadow = skin * 0.78;
  const cv::Scalar hair = contrast_hair(pick(kHair), skin, 0.15);
  const cv::Scalar iris = pick(kIris);
  const cv::Scalar lips = pick(kLips);
  const cv::Scalar cloth = bgr(uni(0.05, 0.95), uni(0.05, 0.95), uni(0.05, 0.95));

  const double face_cx = 0.5 + uni(-0.01, 0.01);
  const double face_cy = 0.56 + uni(-0.01, 0.01);
  const double face_ax = uni(0.27, 0.31);
  const double face_ay = uni(0.36, 0.41);

  // Shoulders, neck, hair mass, ears, face.
  p.ellipse(0.5, 1.08, uni(0.42, 0.5), 0.22, 0, cloth);
  p.ellipse(0.5, 0.9, 0.12, 0.15, 0, skin_shadow);
  const double hair_len = uni(0.0, 0.25);
  p.ellipse(face_cx, face_cy - 0.08 + hair_len / 2, face_ax + uni(0.03, 0.08),
            face_ay * 0.95 + hair_len / 2, 0, hair);
  p.ellipse(face_cx - face_ax, 0.48, 0.035, 0.06, 0, skin_shadow);
  p.ellipse(face_cx + face_ax, 0.48, 0.035, 0.06, 0, skin_shadow);
  p.ellipse(face_cx, face_cy, face_ax, face_ay, 0, skin);
  // Soft side shading.
  const double light = uni(-1.0, 1.0);
  p.ellipse(face_cx - light * face_ax * 0.75, face_cy + 0.02, face_ax * 0.35, face_ay * 0.8, 0,
            mix(skin, skin_shadow, 0.45));
  // Fringe over the forehead.
  const double fringe = uni(0.0, 1.0);
  p.ellipse(face_cx, face_cy - face_ay * uni(0.85, 1.0), face_ax * uni(0.85, 1.05),
            face_ay * (0.12 + 0.2 * fringe), uni(-8, 8), hair);

  // Eyes and brows.
  const double eye_y = 0.425 + uni(-0.012, 0.012);
  const double eye_dx = 0.165 + uni(-0.012, 0.012);
  const double eye_w = uni(0.045, 0.06);
  const double eye_h = uni(0.018, 0.028);
  const double brow_lift = uni(0.05, 0.07);
  const double brow_w = uni(0.010, 0.018);
  const double iris_r = eye_h * uni(0.8, 1.0);
  for (int side : {-1, 1}) {
    const double ex = 0.5 + side * eye_dx;
    p.ellipse(ex, eye_y, eye_w, eye_h, 0, bgr(0.95, 0.95, 0.93));
    p.ellipse(ex, eye_y, iris_r, iris_r, 0, iris);
    p.ellipse(ex, eye_y, iris_r * 0.45, iris_r * 0.45, 0, bgr(0.02, 0.02, 0.02));
    p.ellipse(ex, eye_y, eye_w, eye_h, 0, bgr(0.1, 0.07, 0.06), 0.006, 180, 360);
    const double bx = ex + side * 0.005;
    p.curve({{bx - eye_w * 1.1, eye_y - brow_lift + 0.01},
             {bx - eye_w * 0.3, eye_y - brow_lift - 0.008},
             {bx + eye_w * 0.5, eye_y - brow_lift - 0.006},
             {bx + eye_w * 1.15, eye_y - brow_lift + 0.012}},
            mix(hair, bgr(0, 0, 0), 0.3), brow_w);
  }

  // Nose: bridge shadow, tip, nostrils.
  const double nose_y = 0.615 + uni(-0.012, 0.012);
  const double nose_w = uni(0.03, 0.045);
  p.line(0.5 - 0.02, 0.47, 0.5 - nose_w * 0.7, nose_y - 0.01, skin_shadow, 0.006);
  p.ellipse(0.5, nose_y, nose_w, nose_w * 0.6, 0, mix(skin, skin_shadow, 0.3));
  p.ellipse(0.5 - nose_w * 0.55, nose_y + 0.01, nose_w * 0.28, nose_w * 0.16, 0,
            bgr(0.25, 0.15, 0.12));
  p.ellipse(0.5 + nose_w * 0.55, nose_y + 0.01, nose_w * 0.28, nose_w * 0.16, 0,
            bgr(0.25, 0.15, 0.12));

  // Mouth.
  const double mouth_y = 0.795 + uni(-0.012, 0.012);
  const double mouth_w = uni(0.07, 0.1);
  const double mouth_h = uni(0.018, 0.03);
  const double smile = uni(-0.01, 0.02);
  p.ellipse(0.5, mouth_y, mouth_w, mouth_h, 0, lips);
  if (u01(rng) < 0.35) {
    p.ellipse(0.5, mouth_y, mouth_w * 0.7, mouth_h * 0.45, 0, bgr(0.92, 0.9, 0.86));
  }
  p.curve({{0.5 - mouth_w, mouth_y - smile},
           {0.5 - mouth_w * 0.4, mouth_y + smile * 0.4},
           {0.5 + mouth_w * 0.4, mouth_y + smile * 0.4},
           {0.5 + mouth_w, mouth_y - smile}},
          bgr(0.25, 0.08, 0.08), 0.005);

  cv::Mat out;
  cv::resize(img, out, cv::Size(opts.side, opts.side), 0, 0, cv::INTER_AREA);
  if (opts.noise > 0.0) {
    cv::Mat noise(out.size(), CV_16SC3);
    cv::RNG noise_rng(rng());
    noise_rng.fill(noise, cv::RNG::NORMAL, 0.0, opts.noise * 255.0);
    cv::Mat o16;
    out.convertTo(o16, CV_16SC3);
    o16 += noise;
    o16.convertTo(out, CV_8UC3);
  }
  return out;
}

void write_synthetic_faces(const std::filesystem::path& dir, int count, std::uint64_t seed,
                           const SyntheticFaceOptions& opts) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "face_%05d.png", i);
    cv::imwrite((dir / name).string(), render_synthetic_face(seed, i, opts));
  }
}

}  // namespace facedit
