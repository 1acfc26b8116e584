#include "socdp/law.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace socdp {

Law dirac_law(int stage, int size, int state) {
  if (state < 0 || state >= size)
    throw std::invalid_argument("dirac_law: state index out of range");
  Law mu;
  mu.stage = stage;
  mu.weights.assign(static_cast<std::size_t>(size), 0.0);
  mu.weights[static_cast<std::size_t>(state)] = 1.0;
  return mu;
}

bool is_law(const Law& mu, double tol) {
  double sum = 0.0;
  for (double w : mu.weights) {
    if (w < 0.0) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= tol;
}

void require_law(const Law& mu, int expected_size, double tol) {
  if (mu.size() != expected_size) {
    std::ostringstream os;
    os << "law at stage " << mu.stage << " has " << mu.size()
       << " entries but the state space has " << expected_size;
    throw std::invalid_argument(os.str());
  }
  if (!is_law(mu, tol)) {
    double sum = 0.0;
    for (double w : mu.weights) sum += w;
    std::ostringstream os;
    os << "law at stage " << mu.stage << " is not a probability vector (sum " << sum << ")";
    throw std::invalid_argument(os.str());
  }
}

std::string law_key(std::span<const double> weights, double quantum) {
  std::string key;
  key.resize(weights.size() * sizeof(std::int64_t));
  char* out = key.data();
  for (double w : weights) {
    const std::int64_t q = std::llround(w / quantum);
    std::memcpy(out, &q, sizeof(q));
    out += sizeof(q);
  }
  return key;
}

}  // namespace socdp
