#pragma once

#include <cstdint>

namespace rcm {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless counter-based generator: value n of the stream keyed by `seed`.
/// This is the SplitMix64 stream with a pre-mixed seed, so nearby seeds give
/// unrelated streams and any counter can be evaluated out of order.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;
  return mix64(mix64(seed + gamma) + (counter + 1) * gamma);
}

/// Map 64 bits to the open interval (0,1); never returns 0 or 1.
inline double to_unit_open(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return to_unit_open(counter_hash(seed, counter));
}

}  // namespace rcm
