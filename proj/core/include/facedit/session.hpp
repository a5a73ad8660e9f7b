#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

#include "facedit/engine.hpp"
#include "facedit/layout.hpp"

namespace facedit {

/// One stroke event: {"rev": N, "op": "add"|"erase", "points": [[x,y],...], "width": w}.
/// Coordinates are canvas pixels; width is the line diameter in pixels.
struct Stroke {
  enum class Op { kAdd, kErase };
  std::int64_t rev = 0;
  Op op = Op::kAdd;
  std::vector<std::array<double, 2>> points;
  double width = 1.0;
};

/// Parses a single event object or an array of events. Throws InvalidInput on
/// malformed JSON, unknown ops, non-finite coordinates or non-positive widths.
std::vector<Stroke> parse_strokes(std::string_view json_text);

/// Draws a stroke on an 8-bit single-channel canvas (255 = background): round
/// caps and joins, 8-connected segments, diameter rounded to whole pixels.
/// Adds paint 0, erases paint 255.
void rasterize_stroke(cv::Mat& canvas, const Stroke& stroke);

/// Server-side state of one interactive editing session.
class EditSession {
 public:
  EditSession(std::string id, int side);

  struct Snapshot {
    std::int64_t rev = 0;
    torch::Tensor sketch;      // 1 x H x W, {0,1}
    torch::Tensor appearance;  // 3 x H x W
    std::string appearance_id;
    std::map<Component, torch::Tensor> component_references;
  };

  struct Frame {
    std::int64_t rev = 0;
    std::vector<std::uint8_t> png;
  };

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] int side() const { return side_; }
  [[nodiscard]] std::int64_t revision() const;

  /// Applies events atomically. Every rev must exceed the previous one (and the
  /// current revision); otherwise InvalidInput is thrown and nothing changes.
  /// Returns false for an empty list.
  bool apply(const std::vector<Stroke>& strokes);

  /// Selects the whole-face appearance reference at revision `rev`.
  void select_appearance(std::int64_t rev, std::string id, torch::Tensor image);
  /// Overrides one component's appearance reference at revision `rev`.
  void set_component_reference(std::int64_t rev, Component c, torch::Tensor image);

  [[nodiscard]] cv::Mat canvas() const;
  [[nodiscard]] Snapshot snapshot() const;

  void store_frame(Frame frame);
  [[nodiscard]] std::optional<Frame> last_frame() const;

 private:
  void advance(std::int64_t rev);

  mutable std::mutex mu_;
  std::string id_;
  int side_;
  std::int64_t rev_ = 0;
  cv::Mat canvas_;
  std::string appearance_id_;
  torch::Tensor appearance_;
  std::map<Component, torch::Tensor> component_refs_;
  std::optional<Frame> frame_;
};

/// Renders a snapshot: sketch geometry, whole-face appearance, then the
/// per-component overrides.
torch::Tensor render_snapshot(const Engine& engine, const EditSession::Snapshot& snapshot);

}  // namespace facedit
