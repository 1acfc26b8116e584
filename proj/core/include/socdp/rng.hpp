#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace socdp {

// All seeded randomness flows through mt19937_64 plus the mappings below.
// The engine is pinned by the standard and the mappings are hand-rolled, so
// a seed reproduces the same instance bit for bit on every platform.
using Rng = std::mt19937_64;

// Uniform draw from {0, ..., n-1}.
inline int uniform_index(Rng& rng, int n) {
  if (n <= 0) throw std::invalid_argument("uniform_index: n must be positive");
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_real01(rng);
}

// Strictly positive probability vector of length n.
inline std::vector<double> random_probability_vector(Rng& rng, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& wi : w) {
    wi = uniform_real(rng, 0.1, 1.0);
    total += wi;
  }
  for (double& wi : w) wi /= total;
  return w;
}

// Inverse-CDF draw of an index distributed according to `law`.
inline int sample_index(Rng& rng, const std::vector<double>& law) {
  const double u = uniform_real01(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    cum += law[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(law.size()) - 1;
}

}  // namespace socdp
