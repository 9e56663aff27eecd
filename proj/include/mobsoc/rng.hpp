#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mobsoc {

/// Seeded generator used by every randomized routine. The helpers below
/// derive values directly from the raw 64-bit stream so results are
/// identical across standard library implementations.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Poisson variate by inversion; fine for the small means used here.
inline int poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  double prod = uniform01(rng);
  int k = 0;
  while (prod > limit) {
    prod *= uniform01(rng);
    ++k;
  }
  return k;
}

}  // namespace mobsoc
