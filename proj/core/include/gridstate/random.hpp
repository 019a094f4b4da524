#pragma once

#include <cmath>
#include <cstdint>

namespace gridstate {

/// splitmix64 step. Small, fast, and statistically solid for simulation use.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Mixes two 64-bit values into one seed. Used to derive independent
/// deterministic streams, e.g. per (trial, measurement index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  splitmix64(s);
  s ^= b + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
  splitmix64(s);
  return s;
}

/// Uniform double in (0, 1], from the top 53 bits of a 64-bit word.
inline double uniform_open_closed(std::uint64_t word) {
  return static_cast<double>((word >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal draw addressed by (seed, index). The same pair always
/// yields the same value, independent of any other draw; this is what makes
/// Monte Carlo trials reproducible under concurrent execution and keeps
/// shared measurement rows identical across cases that share a seed.
inline double gaussian_draw(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = mix_seed(seed, index);
  const double u1 = uniform_open_closed(splitmix64(s));
  const double u2 = uniform_open_closed(splitmix64(s));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace gridstate
