#pragma once

#include <cstdint>
#include <string_view>

namespace swasr {

// Stable across platforms and standard library versions; std::hash is not.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a per-item seed from a run seed and an item identifier.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::string_view id) {
  return splitmix64(seed ^ splitmix64(fnv1a64(id)));
}

}  // namespace swasr
