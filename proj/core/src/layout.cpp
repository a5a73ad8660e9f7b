#include "facedit/layout.hpp"

#include <algorithm>
#include <cmath>

namespace facedit {

namespace {
constexpr std::array<std::string_view, 5> kNames = {"left-eye", "right-eye", "nose", "mouth",
                                                     "background"};

int snap_size(double pixels, int multiple, int limit) {
  const int snapped = static_cast<int>(std::lround(pixels / multiple)) * multiple;
  return std::clamp(snapped, multiple, limit);
}
}  // namespace

std::string_view component_name(Component c) { return kNames[static_cast<std::size_t>(c)]; }

std::optional<Component> parse_component(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Component>(i);
  }
  return std::nullopt;
}

ComponentLayout::ComponentLayout(int canvas, const std::array<Window, 5>& windows)
    : canvas_(canvas), windows_(windows) {
  if (canvas <= 0) throw ConfigError("layout canvas must be positive");
  for (Component c : kAllComponents) {
    const Window& w = window(c);
    if (!w.within(canvas, canvas)) {
      throw ConfigError("window for '" + std::string(component_name(c)) +
                        "' lies outside the " + std::to_string(canvas) + "px canvas");
    }
  }
  const Window& bg = window(Component::kBackground);
  if (bg != Window{0, 0, canvas, canvas}) {
    throw ConfigError("background window must cover the full canvas");
  }
}

ComponentLayout ComponentLayout::from_fractions(int canvas,
                                                const std::array<FractionalWindow, 5>& fractions,
                                                int size_multiple) {
  if (size_multiple <= 0 || canvas % size_multiple != 0) {
    throw ConfigError("canvas " + std::to_string(canvas) + " is not a multiple of " +
                      std::to_string(size_multiple));
  }
  std::array<Window, 5> windows{};
  for (Component c : kAllComponents) {
    const auto i = static_cast<std::size_t>(c);
    if (c == Component::kBackground) {
      windows[i] = Window{0, 0, canvas, canvas};
      continue;
    }
    const FractionalWindow& f = fractions[i];
    Window w;
    w.w = snap_size(f.w * canvas, size_multiple, canvas);
    w.h = snap_size(f.h * canvas, size_multiple, canvas);
    // Keep the window centred where the fractions put it, then clamp into the canvas.
    const double cx = (f.x + f.w / 2.0) * canvas;
    const double cy = (f.y + f.h / 2.0) * canvas;
    w.x = std::clamp(static_cast<int>(std::lround(cx - w.w / 2.0)), 0, canvas - w.w);
    w.y = std::clamp(static_cast<int>(std::lround(cy - w.h / 2.0)), 0, canvas - w.h);
    windows[i] = w;
  }
  return ComponentLayout(canvas, windows);
}

std::array<FractionalWindow, 5> ComponentLayout::default_fractions() {
  return {FractionalWindow{0.21, 0.30, 0.25, 0.25}, FractionalWindow{0.54, 0.30, 0.25, 0.25},
          FractionalWindow{0.375, 0.46, 0.25, 0.31}, FractionalWindow{0.33, 0.69, 0.34, 0.21},
          FractionalWindow{0.0, 0.0, 1.0, 1.0}};
}

ComponentLayout ComponentLayout::make_default(int canvas, int size_multiple) {
  return from_fractions(canvas, default_fractions(), size_multiple);
}

}  // namespace facedit
