#include "socdp/fokker_planck.hpp"

#include <stdexcept>

namespace socdp {

namespace {

void check_feedback(const FiniteSOCProblem& problem, int t, std::span<const int> feedback) {
  if (static_cast<int>(feedback.size()) != problem.state_size(t))
    throw std::invalid_argument("feedback map has the wrong number of states");
  for (int u : feedback)
    if (u < 0 || u >= problem.control_size(t))
      throw std::invalid_argument("feedback map uses a control index out of range");
}

}  // namespace

CostFunction backward_operator(const FiniteSOCProblem& problem, int t,
                               std::span<const int> feedback, const CostFunction& psi_next) {
  check_feedback(problem, t, feedback);
  if (psi_next.stage != t + 1)
    throw std::invalid_argument("backward_operator: test function is not at stage t+1");
  if (psi_next.size() != problem.state_size(t + 1))
    throw std::invalid_argument("backward_operator: test function has the wrong size");

  const int nx = problem.state_size(t);
  const int nw = problem.noise_size(t);
  const DynamicsTable& f = problem.dynamics(t);
  const std::vector<double>& pw = problem.noise_law(t);

  CostFunction psi;
  psi.stage = t;
  psi.values.assign(static_cast<std::size_t>(nx), 0.0);
  for (int x = 0; x < nx; ++x) {
    const int u = feedback[static_cast<std::size_t>(x)];
    double acc = 0.0;
    for (int w = 0; w < nw; ++w)
      acc += pw[static_cast<std::size_t>(w)] *
             psi_next.values[static_cast<std::size_t>(f(x, u, w))];
    psi.values[static_cast<std::size_t>(x)] = acc;
  }
  return psi;
}

Law push_forward(const FiniteSOCProblem& problem, int t, std::span<const int> feedback,
                 const Law& mu) {
  check_feedback(problem, t, feedback);
  if (mu.stage != t) throw std::invalid_argument("push_forward: law is not at stage t");
  if (mu.size() != problem.state_size(t))
    throw std::invalid_argument("push_forward: law has the wrong size");

  const int nx = problem.state_size(t);
  const int nw = problem.noise_size(t);
  const DynamicsTable& f = problem.dynamics(t);
  const std::vector<double>& pw = problem.noise_law(t);

  Law out;
  out.stage = t + 1;
  out.weights.assign(static_cast<std::size_t>(problem.state_size(t + 1)), 0.0);
  for (int x = 0; x < nx; ++x) {
    const double m = mu.weights[static_cast<std::size_t>(x)];
    if (m == 0.0) continue;
    const int u = feedback[static_cast<std::size_t>(x)];
    for (int w = 0; w < nw; ++w)
      out.weights[static_cast<std::size_t>(f(x, u, w))] += m * pw[static_cast<std::size_t>(w)];
  }
  return out;
}

CostFunction stage_cost_functional(const FiniteSOCProblem& problem, int t,
                                   std::span<const int> feedback) {
  check_feedback(problem, t, feedback);
  const int nx = problem.state_size(t);
  const int nw = problem.noise_size(t);
  const CostTable& L = problem.stage_cost(t);
  const std::vector<double>& pw = problem.noise_law(t);

  CostFunction lambda;
  lambda.stage = t;
  lambda.values.assign(static_cast<std::size_t>(nx), 0.0);
  for (int x = 0; x < nx; ++x) {
    const int u = feedback[static_cast<std::size_t>(x)];
    double acc = 0.0;
    for (int w = 0; w < nw; ++w)
      acc += pw[static_cast<std::size_t>(w)] * L(x, u, w);
    lambda.values[static_cast<std::size_t>(x)] = acc;
  }
  return lambda;
}

double pairing(const CostFunction& psi, const Law& mu) {
  if (psi.stage != mu.stage)
    throw std::invalid_argument("pairing: function and law live at different stages");
  if (psi.size() != mu.size())
    throw std::invalid_argument("pairing: function and law have different sizes");
  double acc = 0.0;
  for (std::size_t x = 0; x < mu.weights.size(); ++x)
    acc += psi.values[x] * mu.weights[x];
  return acc;
}

double forward_cost(const FiniteSOCProblem& problem, const Policy& policy, const Law& initial) {
  const int t0 = problem.first_stage();
  if (policy.first_stage != t0)
    throw std::invalid_argument("forward_cost: policy starts at a different stage");
  if (initial.stage != t0)
    throw std::invalid_argument("forward_cost: initial law is not at the first stage");
  require_law(initial, problem.state_size(t0));

  Law mu = initial;
  double total = 0.0;
  for (int t = t0; t < problem.last_stage(); ++t) {
    const std::vector<int>& phi = policy.at(t);
    total += pairing(stage_cost_functional(problem, t, phi), mu);
    mu = push_forward(problem, t, phi, mu);
  }
  CostFunction terminal;
  terminal.stage = problem.last_stage();
  terminal.values = problem.final_cost();
  return total + pairing(terminal, mu);
}

BackwardCostResult backward_cost(const FiniteSOCProblem& problem, const Policy& policy,
                                 const Law& initial) {
  const int t0 = problem.first_stage();
  const int N = problem.num_stages();
  if (policy.first_stage != t0)
    throw std::invalid_argument("backward_cost: policy starts at a different stage");
  if (initial.stage != t0)
    throw std::invalid_argument("backward_cost: initial law is not at the first stage");
  require_law(initial, problem.state_size(t0));

  BackwardCostResult result;
  result.psi.first_stage = t0;
  result.psi.value.resize(static_cast<std::size_t>(N) + 1);
  result.psi.value[static_cast<std::size_t>(N)] = problem.final_cost();

  CostFunction psi;
  psi.stage = problem.last_stage();
  psi.values = problem.final_cost();
  for (int t = problem.last_stage() - 1; t >= t0; --t) {
    const std::vector<int>& phi = policy.at(t);
    CostFunction carried = backward_operator(problem, t, phi, psi);
    const CostFunction lambda = stage_cost_functional(problem, t, phi);
    for (std::size_t x = 0; x < carried.values.size(); ++x)
      carried.values[x] += lambda.values[x];
    psi = std::move(carried);
    result.psi.value[static_cast<std::size_t>(t - t0)] = psi.values;
  }
  result.cost = pairing(psi, initial);
  return result;
}

}  // namespace socdp
