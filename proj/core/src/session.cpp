#include "facedit/session.hpp"

#include <cmath>

#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

#include "facedit/errors.hpp"
#include "facedit/raster.hpp"

namespace facedit {

namespace {

Stroke parse_one(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("stroke event must be an object");
  Stroke s;
  try {
    s.rev = j.at("rev").get<std::int64_t>();
    const auto op = j.at("op").get<std::string>();
    if (op == "add") {
      s.op = Stroke::Op::kAdd;
    } else if (op == "erase") {
      s.op = Stroke::Op::kErase;
    } else {
      throw InvalidInput("unknown stroke op '" + op + "'");
    }
    s.width = j.at("width").get<double>();
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) throw InvalidInput("stroke point must be [x, y]");
      s.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed stroke: ") + e.what());
  }
  if (s.points.empty()) throw InvalidInput("stroke has no points");
  if (!std::isfinite(s.width) || s.width <= 0.0) throw InvalidInput("stroke width must be positive");
  for (const auto& p : s.points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
      throw InvalidInput("stroke coordinates must be finite");
    }
  }
  return s;
}

cv::Point to_pixel(const std::array<double, 2>& p) {
  return {static_cast<int>(std::lround(p[0])), static_cast<int>(std::lround(p[1]))};
}

}  // namespace

std::vector<Stroke> parse_strokes(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("stroke message is not JSON: ") + e.what());
  }
  std::vector<Stroke> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(parse_one(e));
  } else {
    out.push_back(parse_one(j));
  }
  return out;
}

void rasterize_stroke(cv::Mat& canvas, const Stroke& stroke) {
  const cv::Scalar color(stroke.op == Stroke::Op::kAdd ? 0 : 255);
  const int thickness = std::max(1, static_cast<int>(std::lround(stroke.width)));
  if (stroke.points.size() == 1) {
    cv::line(canvas, to_pixel(stroke.points[0]), to_pixel(stroke.points[0]), color, thickness,
             cv::LINE_8);
  }
  for (std::size_t i = 1; i < stroke.points.size(); ++i) {
    cv::line(canvas, to_pixel(stroke.points[i - 1]), to_pixel(stroke.points[i]), color, thickness,
             cv::LINE_8);
  }
}

EditSession::EditSession(std::string id, int side)
    : id_(std::move(id)), side_(side), canvas_(side, side, CV_8UC1, cv::Scalar(255)) {
  appearance_ = torch::full({3, side, side}, 0.5);
}

std::int64_t EditSession::revision() const {
  std::lock_guard lock(mu_);
  return rev_;
}

void EditSession::advance(std::int64_t rev) {
  if (rev <= rev_) {
    throw InvalidInput("stale revision " + std::to_string(rev) + " (current " +
                       std::to_string(rev_) + ")");
  }
  rev_ = rev;
}

bool EditSession::apply(const std::vector<Stroke>& strokes) {
  if (strokes.empty()) return false;
  std::lock_guard lock(mu_);
  std::int64_t last = rev_;
  for (const auto& s : strokes) {
    if (s.rev <= last) {
      throw InvalidInput("stale revision " + std::to_string(s.rev) + " (current " +
                         std::to_string(last) + ")");
    }
    if (s.width > side_) throw InvalidInput("stroke wider than the canvas");
    last = s.rev;
  }
  for (const auto& s : strokes) rasterize_stroke(canvas_, s);
  rev_ = last;
  return true;
}

void EditSession::select_appearance(std::int64_t rev, std::string id, torch::Tensor image) {
  std::lock_guard lock(mu_);
  advance(rev);
  appearance_id_ = std::move(id);
  appearance_ = std::move(image);
}

void EditSession::set_component_reference(std::int64_t rev, Component c, torch::Tensor image) {
  std::lock_guard lock(mu_);
  advance(rev);
  component_refs_[c] = std::move(image);
}

cv::Mat EditSession::canvas() const {
  std::lock_guard lock(mu_);
  return canvas_.clone();
}

EditSession::Snapshot EditSession::snapshot() const {
  std::lock_guard lock(mu_);
  Snapshot s;
  s.rev = rev_;
  s.sketch = (mat_to_tensor(canvas_) >= 0.5).to(torch::kFloat32);
  s.appearance = appearance_;
  s.appearance_id = appearance_id_;
  s.component_references = component_refs_;
  return s;
}

void EditSession::store_frame(Frame frame) {
  std::lock_guard lock(mu_);
  if (!frame_ || frame.rev >= frame_->rev) frame_ = std::move(frame);
}

std::optional<EditSession::Frame> EditSession::last_frame() const {
  std::lock_guard lock(mu_);
  return frame_;
}

torch::Tensor render_snapshot(const Engine& engine, const EditSession::Snapshot& snapshot) {
  auto codes = engine.encode(snapshot.sketch, snapshot.appearance);
  for (const auto& [c, ref] : snapshot.component_references) {
    codes = engine.with_component_appearance(codes, c, ref);
  }
  return engine.render(codes);
}

}  // namespace facedit
