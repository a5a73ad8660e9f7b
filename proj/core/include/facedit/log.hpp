#pragma once

#include <sstream>
#include <string>
#include <string_view>

namespace facedit::log {

// Thin front end over spdlog. The backend is compiled in its own translation
// unit because the torch headers carry an incompatible fmt.

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

/// Accepts trace, debug, info, warn, error, off.
void set_level(std::string_view level);

/// Concatenates streamable values into one message.
template <typename... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace facedit::log
