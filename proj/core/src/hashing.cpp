#include "facedit/hashing.hpp"

#include <cstdio>

namespace facedit {

std::string hex_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace facedit
