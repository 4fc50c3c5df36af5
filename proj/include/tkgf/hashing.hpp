#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tkgf {

// 64-bit FNV-1a. The seed is folded into the offset basis so seed 0 yields the
// published constants.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// Stable per-component seed derived from a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view component) {
  return fnv1a64(component, root * 0x9e3779b97f4a7c15ULL);
}

}  // namespace tkgf
