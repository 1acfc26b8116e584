#pragma once

// Independent reference implementations used to cross-check the solvers.
// Everything here is deliberately brute force: enumerate, evaluate, take the
// minimum. Nothing in this header shares logic with the code under test
// beyond the public evaluation primitives.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "socdp/constrained.hpp"
#include "socdp/dp.hpp"
#include "socdp/fokker_planck.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"

namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum expected cost over every feedback policy, one entry per Dirac
// start at the first stage.
inline std::vector<double> brute_force_values(const socdp::FiniteSOCProblem& problem) {
  const int t0 = problem.first_stage();
  const int nx = problem.state_size(t0);
  std::vector<double> best(static_cast<std::size_t>(nx), kInf);
  auto policies = socdp::enumerate_policies(problem);
  while (auto policy = policies.next()) {
    for (int x = 0; x < nx; ++x) {
      const double cost =
          socdp::evaluate_policy_exact(problem, *policy, socdp::dirac_law(t0, nx, x));
      if (cost < best[static_cast<std::size_t>(x)]) best[static_cast<std::size_t>(x)] = cost;
    }
  }
  return best;
}

struct ConstrainedBruteForce {
  bool feasible = false;
  double value = kInf;
};

// Minimum over every feedback sequence (one feedback map per transition
// stage) of the expected total cost, subject to the terminal expectation
// constraint. The initial law may live at any stage.
inline ConstrainedBruteForce brute_force_constrained(
    const socdp::ConstrainedProblem& cp, const socdp::Law& initial,
    double feasibility_tol = socdp::kDefaultFeasibilityTol) {
  const socdp::FiniteSOCProblem sub = socdp::truncate(cp.base, initial.stage);
  ConstrainedBruteForce out;
  auto policies = socdp::enumerate_policies(sub);
  while (auto policy = policies.next()) {
    socdp::Law mu = initial;
    for (int t = sub.first_stage(); t < sub.last_stage(); ++t)
      mu = socdp::push_forward(sub, t, policy->at(t), mu);
    double load = 0.0;
    for (int x = 0; x < mu.size(); ++x)
      load += cp.constraint.g[static_cast<std::size_t>(x)] *
              mu.weights[static_cast<std::size_t>(x)];
    if (load > cp.constraint.level + feasibility_tol) continue;
    out.feasible = true;
    const double cost = socdp::forward_cost(sub, *policy, initial);
    if (cost < out.value) out.value = cost;
  }
  return out;
}

// P(every stagewise event holds along the path) from a Dirac start, computed
// by exhaustive enumeration of noise paths on the *unaugmented* problem.
// thresholds[k] is the event tested when the path arrives at stage
// first_stage + k + 1.
inline double path_survival_probability(const socdp::FiniteSOCProblem& problem,
                                        const std::vector<socdp::StageThreshold>& thresholds,
                                        const socdp::Policy& policy, int initial_state) {
  struct Walker {
    const socdp::FiniteSOCProblem& p;
    const std::vector<socdp::StageThreshold>& th;
    const socdp::Policy& pol;

    double go(int t, int x, int alive) const {
      if (t == p.last_stage()) return alive ? 1.0 : 0.0;
      const int u = pol.at(t)[static_cast<std::size_t>(x)];
      const auto& law = p.noise_law(t);
      const auto& entry = th[static_cast<std::size_t>(t - p.first_stage())];
      double total = 0.0;
      for (int w = 0; w < p.noise_size(t); ++w) {
        const int xn = p.dynamics(t)(x, u, w);
        const int met = entry.g[static_cast<std::size_t>(xn)] >= entry.b ? 1 : 0;
        total += law[static_cast<std::size_t>(w)] * go(t + 1, xn, alive * met);
      }
      return total;
    }
  };
  return Walker{problem, thresholds, policy}.go(problem.first_stage(), initial_state, 1);
}

// Minimum open-loop cost of a noise-free problem by enumerating every
// control sequence from the initial state.
struct OpenLoopBruteForce {
  double cost = kInf;
  std::vector<int> controls;
};

inline OpenLoopBruteForce brute_force_open_loop(const socdp::FiniteSOCProblem& problem,
                                                int initial_state) {
  const int t0 = problem.first_stage();
  const int horizon = problem.num_stages();
  std::vector<int> seq(static_cast<std::size_t>(horizon), 0);
  OpenLoopBruteForce out;
  while (true) {
    double cost = 0.0;
    int x = initial_state;
    for (int k = 0; k < horizon; ++k) {
      const int t = t0 + k;
      const int u = seq[static_cast<std::size_t>(k)];
      cost += problem.stage_cost(t)(x, u, 0);
      x = problem.dynamics(t)(x, u, 0);
    }
    cost += problem.final_cost()[static_cast<std::size_t>(x)];
    if (cost < out.cost) {
      out.cost = cost;
      out.controls = seq;
    }
    int k = horizon - 1;
    while (k >= 0) {
      if (++seq[static_cast<std::size_t>(k)] < problem.control_size(t0 + k)) break;
      seq[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

}  // namespace oracles
