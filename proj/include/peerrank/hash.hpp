#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>

namespace peerrank {

/// FNV-1a 64-bit hash; stamps artifacts with the manifest that produced
/// them and keys deterministic per-cell seeds off string ids.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace peerrank
