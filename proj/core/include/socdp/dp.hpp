#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "socdp/law.hpp"
#include "socdp/problem.hpp"

namespace socdp {

inline constexpr std::uint64_t kDefaultPolicyCap = 10'000'000;

// Markov feedback policy: one map from state index to control index per
// transition stage.
struct Policy {
  int first_stage = 0;
  std::vector<std::vector<int>> feedback;  // feedback[k][x], k = t - first_stage

  const std::vector<int>& at(int t) const {
    return feedback[static_cast<std::size_t>(t - first_stage)];
  }
  std::vector<int>& at(int t) {
    return feedback[static_cast<std::size_t>(t - first_stage)];
  }
};

// Per-stage value table; value[k][x] is the optimal (or policy) cost-to-go
// from state x at stage first_stage + k.
struct CostToGo {
  int first_stage = 0;
  std::vector<std::vector<double>> value;

  double at(int t, int x) const {
    return value[static_cast<std::size_t>(t - first_stage)][static_cast<std::size_t>(x)];
  }
};

// One realized path: states, controls, per-transition noise indices, and the
// realized total cost (sum of stage costs plus final cost).
struct Trajectory {
  int first_stage = 0;
  std::vector<int> states;    // length N+1
  std::vector<int> controls;  // length N
  std::vector<int> noises;    // length N, noise drawn on the transition leaving each stage
  double realized_cost = 0.0;
};

struct DpSolution {
  CostToGo value;
  Policy policy;
};

// Backward dynamic programming. value[T] equals the final cost and
//   value[t][x] = min_u E_w[ L_t(x,u,w) + value[t+1][f_t(x,u,w)] ].
// Ties in the minimization are grouped within kTieTolerance and broken
// toward the smallest control index, so the returned policy is canonical
// and repeated runs are bitwise identical.
DpSolution solve_dp(const FiniteSOCProblem& problem);

// Expected total cost of `policy` from the initial law, computed by exact
// forward propagation of the law over the reachable support.
double evaluate_policy_exact(const FiniteSOCProblem& problem, const Policy& policy,
                             const Law& initial);

// Stream over every feedback policy, in lexicographic order over
// (stage, state, control). Single-consumer.
class PolicyEnumeration {
 public:
  explicit PolicyEnumeration(const FiniteSOCProblem& problem,
                             std::uint64_t cap = kDefaultPolicyCap);

  // Total number of policies (the product over stages of nu^nx).
  std::uint64_t size() const { return total_; }

  std::optional<Policy> next();

 private:
  const FiniteSOCProblem* problem_;
  std::uint64_t total_;
  bool started_ = false;
  bool done_ = false;
  Policy current_;
};

PolicyEnumeration enumerate_policies(const FiniteSOCProblem& problem,
                                     std::uint64_t cap = kDefaultPolicyCap);

// Number of feedback policies, saturating at UINT64_MAX on overflow.
std::uint64_t count_policies(const FiniteSOCProblem& problem);

// Rolls one trajectory under `policy` from `initial_state` with the given
// per-transition noise indices.
Trajectory simulate(const FiniteSOCProblem& problem, const Policy& policy,
                    int initial_state, const std::vector<int>& noise_draws);

// Open-loop plan for a noise-free problem.
struct OpenLoopPlan {
  int first_stage = 0;
  std::vector<int> controls;
  double cost = 0.0;
};

// Requires every noise space to be a singleton. Solves by dynamic
// programming, then reads the open-loop control sequence off the optimal
// feedback from `initial_state`.
OpenLoopPlan solve_deterministic(const FiniteSOCProblem& problem, int initial_state);

// The policy restricted to stages from_stage .. last_stage - 1.
Policy truncate(const Policy& policy, int from_stage);

}  // namespace socdp
