#pragma once

#include <span>
#include <vector>

#include "socdp/dp.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"

namespace socdp {

// Real-valued function on one stage's state space, e.g. a cost-to-go slice
// or a terminal test function.
struct CostFunction {
  int stage = 0;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
};

// Backward transport of a test function across one transition under the
// feedback map: (result)(x) = E_w[ psi_next(f_t(x, feedback[x], w)) ].
CostFunction backward_operator(const FiniteSOCProblem& problem, int t,
                               std::span<const int> feedback, const CostFunction& psi_next);

// Forward transport of a law across one transition under the feedback map;
// the adjoint of backward_operator. Mass is scattered, never renormalized.
Law push_forward(const FiniteSOCProblem& problem, int t, std::span<const int> feedback,
                 const Law& mu);

// Expected one-transition cost as a function of the departure state:
// (result)(x) = E_w[ L_t(x, feedback[x], w) ].
CostFunction stage_cost_functional(const FiniteSOCProblem& problem, int t,
                                   std::span<const int> feedback);

// Duality pairing: sum over x of psi(x) * mu(x). Both sides must live on
// the same stage's state space.
double pairing(const CostFunction& psi, const Law& mu);

// Expected total cost of the policy from the initial law, computed on the
// law side: push the law forward stage by stage, pairing it with each stage
// cost functional and finally with the terminal cost.
double forward_cost(const FiniteSOCProblem& problem, const Policy& policy, const Law& initial);

struct BackwardCostResult {
  double cost = 0.0;
  CostToGo psi;  // per-stage cost-to-go of the fixed policy
};

// The same expected total cost computed on the function side: transport the
// terminal cost backward through backward_operator, adding each stage cost
// functional, then pair the stage-t0 result with the initial law.
BackwardCostResult backward_cost(const FiniteSOCProblem& problem, const Policy& policy,
                                 const Law& initial);

}  // namespace socdp
