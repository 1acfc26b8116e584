#include "socdp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "socdp/fokker_planck.hpp"

namespace socdp {

namespace {

int range_draw(Rng& rng, int lo, int hi) {
  if (lo > hi || lo < 1) throw std::invalid_argument("size range is empty or non-positive");
  return lo + uniform_index(rng, hi - lo + 1);
}

}  // namespace

FiniteSOCProblem random_problem(Rng& rng, const RandomProblemSpec& spec) {
  const int N = range_draw(rng, spec.min_stages, spec.max_stages);
  std::vector<int> state_sizes(static_cast<std::size_t>(N) + 1);
  std::vector<int> control_sizes(static_cast<std::size_t>(N));
  std::vector<int> noise_sizes(static_cast<std::size_t>(N));
  for (int k = 0; k <= N; ++k)
    state_sizes[static_cast<std::size_t>(k)] = range_draw(rng, spec.min_states, spec.max_states);
  for (int k = 0; k < N; ++k) {
    control_sizes[static_cast<std::size_t>(k)] =
        range_draw(rng, spec.min_controls, spec.max_controls);
    noise_sizes[static_cast<std::size_t>(k)] = range_draw(rng, spec.min_noises, spec.max_noises);
  }

  FiniteSOCProblem problem(spec.first_stage, state_sizes, control_sizes, noise_sizes);
  for (int t = problem.first_stage(); t < problem.last_stage(); ++t) {
    const int nx = problem.state_size(t);
    const int nu = problem.control_size(t);
    const int nw = problem.noise_size(t);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u)
        for (int w = 0; w < nw; ++w) {
          problem.dynamics(t)(x, u, w) = uniform_index(rng, problem.state_size(t + 1));
          problem.stage_cost(t)(x, u, w) = uniform_real(rng, spec.cost_lo, spec.cost_hi);
        }
    if (nw > 1) problem.noise_law(t) = random_probability_vector(rng, nw);
  }
  for (double& k : problem.final_cost()) k = uniform_real(rng, spec.cost_lo, spec.cost_hi);
  return problem;
}

FiniteSOCProblem random_deterministic_problem(Rng& rng, const RandomProblemSpec& spec) {
  RandomProblemSpec det = spec;
  det.min_noises = 1;
  det.max_noises = 1;
  return random_problem(rng, det);
}

Policy random_policy(Rng& rng, const FiniteSOCProblem& problem) {
  Policy policy;
  policy.first_stage = problem.first_stage();
  policy.feedback.resize(static_cast<std::size_t>(problem.num_stages()));
  for (int t = problem.first_stage(); t < problem.last_stage(); ++t) {
    std::vector<int>& phi = policy.at(t);
    phi.resize(static_cast<std::size_t>(problem.state_size(t)));
    for (int& u : phi) u = uniform_index(rng, problem.control_size(t));
  }
  return policy;
}

Law random_law(Rng& rng, int stage, int size) {
  Law mu;
  mu.stage = stage;
  mu.weights = random_probability_vector(rng, size);
  return mu;
}

int MultiplicativeGridInstance::state_of(int stage, double value) const {
  const std::vector<double>& layer = grid[static_cast<std::size_t>(stage - problem.first_stage())];
  const auto it = std::lower_bound(layer.begin(), layer.end(), value);
  if (it == layer.end() || *it != value) {
    std::ostringstream os;
    os << "state_of: value " << value << " is not on the stage-" << stage << " grid";
    throw std::invalid_argument(os.str());
  }
  return static_cast<int>(it - layer.begin());
}

MultiplicativeGridInstance make_multiplicative_grid(const MultiplicativeGridSpec& spec) {
  if (spec.num_stages < 1) throw std::invalid_argument("grid needs at least one transition");
  if (spec.factors.empty() || spec.factors.size() != spec.run_rates.size())
    throw std::invalid_argument("need matching factor and rate lists");
  if (spec.initial_values.empty()) throw std::invalid_argument("need at least one initial value");

  const int nu = static_cast<int>(spec.factors.size());
  std::vector<std::vector<double>> grid(static_cast<std::size_t>(spec.num_stages) + 1);
  grid[0] = spec.initial_values;
  std::sort(grid[0].begin(), grid[0].end());
  grid[0].erase(std::unique(grid[0].begin(), grid[0].end()), grid[0].end());
  for (int k = 0; k < spec.num_stages; ++k) {
    std::vector<double>& next = grid[static_cast<std::size_t>(k) + 1];
    for (double v : grid[static_cast<std::size_t>(k)])
      for (double a : spec.factors) next.push_back(a * v);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
  }

  std::vector<int> state_sizes;
  state_sizes.reserve(grid.size());
  for (const std::vector<double>& layer : grid)
    state_sizes.push_back(static_cast<int>(layer.size()));
  const std::vector<int> control_sizes(static_cast<std::size_t>(spec.num_stages), nu);
  const std::vector<int> noise_sizes(static_cast<std::size_t>(spec.num_stages), 1);

  MultiplicativeGridInstance instance{
      FiniteSOCProblem(spec.first_stage, state_sizes, control_sizes, noise_sizes),
      std::move(grid)};
  FiniteSOCProblem& p = instance.problem;
  for (int k = 0; k < spec.num_stages; ++k) {
    const int t = spec.first_stage + k;
    const std::vector<double>& layer = instance.grid[static_cast<std::size_t>(k)];
    for (int x = 0; x < p.state_size(t); ++x)
      for (int u = 0; u < nu; ++u) {
        const double v = layer[static_cast<std::size_t>(x)];
        p.dynamics(t)(x, u, 0) =
            instance.state_of(t + 1, spec.factors[static_cast<std::size_t>(u)] * v);
        p.stage_cost(t)(x, u, 0) = spec.run_rates[static_cast<std::size_t>(u)] * v;
      }
  }
  const std::vector<double>& last = instance.grid.back();
  for (std::size_t x = 0; x < last.size(); ++x)
    p.final_cost()[x] = spec.final_rate * last[x];
  return instance;
}

ConstrainedInstance random_constrained_instance(Rng& rng, const RandomConstrainedSpec& spec) {
  FiniteSOCProblem base = random_problem(rng, spec.base);
  const int nT = base.state_size(base.last_stage());

  ConstrainedInstance instance{ConstrainedProblem{std::move(base), ExpectationConstraint{}},
                               {}, 0.0, 0.0, 0, Law{}};
  instance.h.resize(static_cast<std::size_t>(nT));
  for (double& v : instance.h) v = uniform_real01(rng);
  instance.b = uniform_real(rng, 0.2, 0.8);
  instance.pi = spec.probability_levels[static_cast<std::size_t>(
      uniform_index(rng, static_cast<int>(spec.probability_levels.size())))];
  instance.problem.constraint = make_chance_constraint(instance.h, instance.b, instance.pi);

  const FiniteSOCProblem& p = instance.problem.base;
  instance.initial_state = uniform_index(rng, p.state_size(p.first_stage()));
  instance.initial =
      dirac_law(p.first_stage(), p.state_size(p.first_stage()), instance.initial_state);
  return instance;
}

bool constraint_binds(const ConstrainedInstance& instance) {
  const FiniteSOCProblem& p = instance.problem.base;
  const DpSolution sol = solve_dp(p);
  Law mu = instance.initial;
  for (int t = p.first_stage(); t < p.last_stage(); ++t)
    mu = push_forward(p, t, sol.policy.at(t), mu);
  double load = 0.0;
  for (std::size_t x = 0; x < mu.weights.size(); ++x)
    load += instance.problem.constraint.g[x] * mu.weights[x];
  return load > instance.problem.constraint.level + kDefaultFeasibilityTol;
}

bool near_constraint_boundary(const ConstrainedProblem& problem, const Law& initial,
                              double margin) {
  const FiniteSOCProblem& p = problem.base;
  PolicyEnumeration policies = enumerate_policies(p);
  while (std::optional<Policy> policy = policies.next()) {
    Law mu = initial;
    for (int t = p.first_stage(); t < p.last_stage(); ++t)
      mu = push_forward(p, t, policy->at(t), mu);
    double load = 0.0;
    for (std::size_t x = 0; x < mu.weights.size(); ++x)
      load += problem.constraint.g[x] * mu.weights[x];
    if (std::abs(load - problem.constraint.level) <= margin) return true;
  }
  return false;
}

}  // namespace socdp
