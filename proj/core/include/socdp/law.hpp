#pragma once

#include <span>
#include <string>
#include <vector>

namespace socdp {

// Probability law of the state at one stage: a probability vector over that
// stage's state space.
struct Law {
  int stage = 0;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

// Point mass at `state` over a state space of the given size.
Law dirac_law(int stage, int size, int state);

// Nonnegative and normalized within `tol`.
bool is_law(const Law& mu, double tol = 1e-12);

// Throws std::invalid_argument when `mu` is not a law of the given size.
void require_law(const Law& mu, int expected_size, double tol = 1e-12);

// Hashable key of the per-coordinate quantization of `weights` (rounding to
// multiples of `quantum`). Laws that agree after quantization collide.
std::string law_key(std::span<const double> weights, double quantum);

}  // namespace socdp
