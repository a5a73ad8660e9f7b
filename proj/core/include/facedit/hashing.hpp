#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace facedit {

/// 64-bit FNV-1a; stable across platforms and runs.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) { update(std::as_bytes(std::span(s.data(), s.size()))); }
  template <typename T>
  void update_value(const T& v) {
    update(std::as_bytes(std::span(&v, 1)));
  }
  [[nodiscard]] std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Lower-case 16-digit hexadecimal rendering of a 64-bit digest.
std::string hex_digest(std::uint64_t digest);

}  // namespace facedit
