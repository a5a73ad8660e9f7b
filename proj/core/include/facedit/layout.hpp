#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "facedit/errors.hpp"

namespace facedit {

/// The five facial components processed by independent local modules.
enum class Component : std::uint8_t { kLeftEye, kRightEye, kNose, kMouth, kBackground };

inline constexpr std::array<Component, 5> kAllComponents = {
    Component::kLeftEye, Component::kRightEye, Component::kNose, Component::kMouth,
    Component::kBackground};

/// Order in which component features overwrite the background canvas.
/// Later entries win where windows overlap.
inline constexpr std::array<Component, 4> kFusionOrder = {
    Component::kMouth, Component::kNose, Component::kLeftEye, Component::kRightEye};

std::string_view component_name(Component c);
std::optional<Component> parse_component(std::string_view name);

/// Pixel window on the canvas.
struct Window {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  [[nodiscard]] bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  [[nodiscard]] bool within(int width, int height) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
  }
  bool operator==(const Window&) const = default;
};

/// Component window expressed as fractions of the canvas side.
struct FractionalWindow {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  bool operator==(const FractionalWindow&) const = default;
};

/// Named crop windows for every component on a square canvas.
class ComponentLayout {
 public:
  ComponentLayout() = default;

  /// Windows are validated against a `canvas` x `canvas` raster.
  ComponentLayout(int canvas, const std::array<Window, 5>& windows);

  /// Resolves fractional windows at `canvas` pixels. Sizes snap to multiples of
  /// `size_multiple` (the geometry latent stride) so every crop has a whole latent grid.
  static ComponentLayout from_fractions(int canvas,
                                        const std::array<FractionalWindow, 5>& fractions,
                                        int size_multiple);

  /// Default windows for aligned frontal faces.
  static std::array<FractionalWindow, 5> default_fractions();
  static ComponentLayout make_default(int canvas, int size_multiple);

  [[nodiscard]] int canvas() const { return canvas_; }
  [[nodiscard]] const Window& window(Component c) const {
    return windows_[static_cast<std::size_t>(c)];
  }
  [[nodiscard]] const std::array<Window, 5>& windows() const { return windows_; }

  bool operator==(const ComponentLayout&) const = default;

 private:
  int canvas_ = 0;
  std::array<Window, 5> windows_{};
};

}  // namespace facedit
