#include "socdp/dp.hpp"

#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "socdp/errors.hpp"

namespace socdp {

DpSolution solve_dp(const FiniteSOCProblem& problem) {
  const int t0 = problem.first_stage();
  const int T = problem.last_stage();
  const int N = problem.num_stages();

  DpSolution sol;
  sol.value.first_stage = t0;
  sol.value.value.resize(static_cast<std::size_t>(N) + 1);
  sol.policy.first_stage = t0;
  sol.policy.feedback.resize(static_cast<std::size_t>(N));

  sol.value.value[static_cast<std::size_t>(N)] = problem.final_cost();

  for (int t = T - 1; t >= t0; --t) {
    const int nx = problem.state_size(t);
    const int nu = problem.control_size(t);
    const int nw = problem.noise_size(t);
    const DynamicsTable& f = problem.dynamics(t);
    const CostTable& L = problem.stage_cost(t);
    const std::vector<double>& pw = problem.noise_law(t);
    const std::vector<double>& next = sol.value.value[static_cast<std::size_t>(t - t0 + 1)];

    std::vector<double>& v = sol.value.value[static_cast<std::size_t>(t - t0)];
    std::vector<int>& phi = sol.policy.feedback[static_cast<std::size_t>(t - t0)];
    v.assign(static_cast<std::size_t>(nx), 0.0);
    phi.assign(static_cast<std::size_t>(nx), 0);

    for (int x = 0; x < nx; ++x) {
      double qmin = std::numeric_limits<double>::infinity();
      std::vector<double> q(static_cast<std::size_t>(nu));
      for (int u = 0; u < nu; ++u) {
        double acc = 0.0;
        for (int w = 0; w < nw; ++w)
          acc += pw[static_cast<std::size_t>(w)] *
                 (L(x, u, w) + next[static_cast<std::size_t>(f(x, u, w))]);
        q[static_cast<std::size_t>(u)] = acc;
        if (acc < qmin) qmin = acc;
      }
      int best = 0;
      while (q[static_cast<std::size_t>(best)] > qmin + kTieTolerance) ++best;
      v[static_cast<std::size_t>(x)] = qmin;
      phi[static_cast<std::size_t>(x)] = best;
    }
  }
  return sol;
}

double evaluate_policy_exact(const FiniteSOCProblem& problem, const Policy& policy,
                             const Law& initial) {
  const int t0 = problem.first_stage();
  const int T = problem.last_stage();
  if (policy.first_stage != t0)
    throw std::invalid_argument("evaluate_policy_exact: policy starts at a different stage");
  if (initial.stage != t0)
    throw std::invalid_argument("evaluate_policy_exact: initial law is not at the first stage");
  require_law(initial, problem.state_size(t0));

  std::vector<double> mu = initial.weights;
  double total = 0.0;
  for (int t = t0; t < T; ++t) {
    const int nw = problem.noise_size(t);
    const DynamicsTable& f = problem.dynamics(t);
    const CostTable& L = problem.stage_cost(t);
    const std::vector<double>& pw = problem.noise_law(t);
    const std::vector<int>& phi = policy.at(t);

    std::vector<double> next(static_cast<std::size_t>(problem.state_size(t + 1)), 0.0);
    for (int x = 0; x < problem.state_size(t); ++x) {
      const double m = mu[static_cast<std::size_t>(x)];
      if (m <= kSupportTol) continue;
      const int u = phi[static_cast<std::size_t>(x)];
      for (int w = 0; w < nw; ++w) {
        const double p = m * pw[static_cast<std::size_t>(w)];
        total += p * L(x, u, w);
        next[static_cast<std::size_t>(f(x, u, w))] += p;
      }
    }
    mu = std::move(next);
  }
  const std::vector<double>& K = problem.final_cost();
  for (std::size_t x = 0; x < mu.size(); ++x) total += mu[x] * K[x];
  return total;
}

PolicyEnumeration::PolicyEnumeration(const FiniteSOCProblem& problem, std::uint64_t cap)
    : problem_(&problem), total_(count_policies(problem)) {
  if (total_ > cap) {
    std::ostringstream os;
    os << "policy enumeration would visit " << total_ << " policies, above the cap of " << cap;
    throw CapExceededError(os.str(), total_, cap);
  }
  current_.first_stage = problem.first_stage();
  current_.feedback.resize(static_cast<std::size_t>(problem.num_stages()));
  for (int t = problem.first_stage(); t < problem.last_stage(); ++t)
    current_.at(t).assign(static_cast<std::size_t>(problem.state_size(t)), 0);
}

std::optional<Policy> PolicyEnumeration::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    return current_;
  }
  // Odometer over the (stage, state) slots; the last slot varies fastest.
  for (int t = problem_->last_stage() - 1; t >= problem_->first_stage(); --t) {
    const int nu = problem_->control_size(t);
    std::vector<int>& phi = current_.at(t);
    for (int x = problem_->state_size(t) - 1; x >= 0; --x) {
      int& u = phi[static_cast<std::size_t>(x)];
      if (++u < nu) return current_;
      u = 0;
    }
  }
  done_ = true;
  return std::nullopt;
}

PolicyEnumeration enumerate_policies(const FiniteSOCProblem& problem, std::uint64_t cap) {
  return PolicyEnumeration(problem, cap);
}

std::uint64_t count_policies(const FiniteSOCProblem& problem) {
  const std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  for (int t = problem.first_stage(); t < problem.last_stage(); ++t) {
    const std::uint64_t nu = static_cast<std::uint64_t>(problem.control_size(t));
    for (int x = 0; x < problem.state_size(t); ++x) {
      if (nu != 0 && total > kMax / nu) return kMax;
      total *= nu;
    }
  }
  return total;
}

Trajectory simulate(const FiniteSOCProblem& problem, const Policy& policy,
                    int initial_state, const std::vector<int>& noise_draws) {
  const int t0 = problem.first_stage();
  const int N = problem.num_stages();
  if (policy.first_stage != t0)
    throw std::invalid_argument("simulate: policy starts at a different stage");
  if (static_cast<int>(noise_draws.size()) != N)
    throw std::invalid_argument("simulate: need one noise index per transition");
  if (initial_state < 0 || initial_state >= problem.state_size(t0))
    throw std::invalid_argument("simulate: initial state out of range");

  Trajectory traj;
  traj.first_stage = t0;
  traj.states.reserve(static_cast<std::size_t>(N) + 1);
  traj.controls.reserve(static_cast<std::size_t>(N));
  traj.noises = noise_draws;

  int x = initial_state;
  traj.states.push_back(x);
  for (int t = t0; t < problem.last_stage(); ++t) {
    const int w = noise_draws[static_cast<std::size_t>(t - t0)];
    if (w < 0 || w >= problem.noise_size(t))
      throw std::invalid_argument("simulate: noise index out of range");
    const int u = policy.at(t)[static_cast<std::size_t>(x)];
    traj.realized_cost += problem.stage_cost(t)(x, u, w);
    x = problem.dynamics(t)(x, u, w);
    traj.controls.push_back(u);
    traj.states.push_back(x);
  }
  traj.realized_cost += problem.final_cost()[static_cast<std::size_t>(x)];
  return traj;
}

OpenLoopPlan solve_deterministic(const FiniteSOCProblem& problem, int initial_state) {
  for (int t = problem.first_stage(); t < problem.last_stage(); ++t)
    if (problem.noise_size(t) != 1)
      throw std::invalid_argument("solve_deterministic: problem has a non-singleton noise space");
  if (initial_state < 0 || initial_state >= problem.state_size(problem.first_stage()))
    throw std::invalid_argument("solve_deterministic: initial state out of range");

  const DpSolution sol = solve_dp(problem);
  OpenLoopPlan plan;
  plan.first_stage = problem.first_stage();
  plan.cost = sol.value.at(problem.first_stage(), initial_state);
  int x = initial_state;
  for (int t = problem.first_stage(); t < problem.last_stage(); ++t) {
    const int u = sol.policy.at(t)[static_cast<std::size_t>(x)];
    plan.controls.push_back(u);
    x = problem.dynamics(t)(x, u, 0);
  }
  return plan;
}

Policy truncate(const Policy& policy, int from_stage) {
  const int last = policy.first_stage + static_cast<int>(policy.feedback.size());
  if (from_stage < policy.first_stage || from_stage > last)
    throw std::out_of_range("truncate: stage outside the policy's range");
  Policy out;
  out.first_stage = from_stage;
  out.feedback.assign(policy.feedback.begin() + (from_stage - policy.first_stage),
                      policy.feedback.end());
  return out;
}

}  // namespace socdp
