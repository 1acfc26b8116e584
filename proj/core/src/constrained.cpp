#include "socdp/constrained.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "socdp/errors.hpp"
#include "socdp/fokker_planck.hpp"

namespace socdp {

ExpectationConstraint make_chance_constraint(const std::vector<double>& h, double b, double pi) {
  if (!(pi >= 0.0 && pi <= 1.0))
    throw std::invalid_argument("make_chance_constraint: probability bound must lie in [0, 1]");
  ExpectationConstraint c;
  c.level = pi;
  c.g.reserve(h.size());
  for (double v : h) c.g.push_back(v >= b ? 1.0 : 0.0);
  return c;
}

ConstrainedProblem augment_joint_chance(const FiniteSOCProblem& problem,
                                        const std::vector<StageThreshold>& thresholds,
                                        double pi) {
  if (!(pi >= 0.0 && pi <= 1.0))
    throw std::invalid_argument("augment_joint_chance: probability bound must lie in [0, 1]");
  const int t0 = problem.first_stage();
  const int N = problem.num_stages();
  if (static_cast<int>(thresholds.size()) != N)
    throw std::invalid_argument(
        "augment_joint_chance: need one threshold per stage after the first");
  for (int k = 0; k < N; ++k)
    if (static_cast<int>(thresholds[static_cast<std::size_t>(k)].g.size()) !=
        problem.state_size(t0 + k + 1)) {
      std::ostringstream os;
      os << "augment_joint_chance: threshold function for stage " << (t0 + k + 1)
         << " has the wrong number of states";
      throw std::invalid_argument(os.str());
    }

  // Indicator of "the threshold at stage t0+k+1 is met at state x".
  auto met = [&](int k, int x) {
    const StageThreshold& th = thresholds[static_cast<std::size_t>(k)];
    return th.g[static_cast<std::size_t>(x)] >= th.b ? 1 : 0;
  };

  std::vector<int> state_sizes(static_cast<std::size_t>(N) + 1);
  std::vector<int> control_sizes(static_cast<std::size_t>(N));
  std::vector<int> noise_sizes(static_cast<std::size_t>(N));
  state_sizes[0] = problem.state_size(t0);
  for (int k = 0; k < N; ++k) {
    state_sizes[static_cast<std::size_t>(k) + 1] = 2 * problem.state_size(t0 + k + 1);
    control_sizes[static_cast<std::size_t>(k)] = problem.control_size(t0 + k);
    noise_sizes[static_cast<std::size_t>(k)] = problem.noise_size(t0 + k);
  }

  FiniteSOCProblem aug(t0, state_sizes, control_sizes, noise_sizes);
  for (int k = 0; k < N; ++k) {
    const int t = t0 + k;
    const int base_nx = problem.state_size(t);
    const int nx = aug.state_size(t);
    const int nu = problem.control_size(t);
    const int nw = problem.noise_size(t);
    aug.noise_law(t) = problem.noise_law(t);
    for (int i = 0; i < nx; ++i) {
      const int x = i % base_nx;
      const int y = i / base_nx;  // 0 at the unaugmented first stage
      for (int u = 0; u < nu; ++u) {
        for (int w = 0; w < nw; ++w) {
          const int xn = problem.dynamics(t)(x, u, w);
          // The flag enters as 1 on the first transition, then multiplies.
          const int y_in = (k == 0) ? 1 : y;
          const int yn = y_in * met(k, xn);
          aug.dynamics(t)(i, u, w) = xn + yn * problem.state_size(t + 1);
          aug.stage_cost(t)(i, u, w) = problem.stage_cost(t)(x, u, w);
        }
      }
    }
  }
  const int base_nT = problem.state_size(t0 + N);
  aug.final_cost().resize(static_cast<std::size_t>(2 * base_nT));
  for (int i = 0; i < 2 * base_nT; ++i)
    aug.final_cost()[static_cast<std::size_t>(i)] =
        problem.final_cost()[static_cast<std::size_t>(i % base_nT)];

  ConstrainedProblem cp{std::move(aug), ExpectationConstraint{}};
  cp.constraint.level = pi;
  cp.constraint.g.assign(static_cast<std::size_t>(2 * base_nT), 0.0);
  for (int i = base_nT; i < 2 * base_nT; ++i)
    cp.constraint.g[static_cast<std::size_t>(i)] = 1.0;
  return cp;
}

std::uint64_t feedback_map_count(int nx, int nu) {
  const std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  const std::uint64_t base = static_cast<std::uint64_t>(nu);
  for (int x = 0; x < nx; ++x) {
    if (base != 0 && total > kMax / base) return kMax;
    total *= base;
  }
  return total;
}

std::vector<int> decode_feedback(std::uint64_t id, int nx, int nu) {
  std::vector<int> feedback(static_cast<std::size_t>(nx));
  const std::uint64_t base = static_cast<std::uint64_t>(nu);
  for (int x = nx - 1; x >= 0; --x) {
    feedback[static_cast<std::size_t>(x)] = static_cast<int>(id % base);
    id /= base;
  }
  if (id != 0) throw std::out_of_range("decode_feedback: id out of range");
  return feedback;
}

std::uint64_t encode_feedback(const std::vector<int>& feedback, int nu) {
  std::uint64_t id = 0;
  for (int u : feedback) {
    if (u < 0 || u >= nu) throw std::out_of_range("encode_feedback: control index out of range");
    id = id * static_cast<std::uint64_t>(nu) + static_cast<std::uint64_t>(u);
  }
  return id;
}

ReachableLawGraph reachable_laws(const FiniteSOCProblem& problem, const Law& initial,
                                 const LawDpOptions& opts) {
  const int t0 = initial.stage;
  if (t0 < problem.first_stage() || t0 > problem.last_stage())
    throw std::invalid_argument("reachable_laws: initial law is outside the problem's stages");
  require_law(initial, problem.state_size(t0));

  const int M = problem.last_stage() - t0;
  const std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

  ReachableLawGraph graph;
  graph.first_stage = t0;
  graph.feedback_counts.resize(static_cast<std::size_t>(M));
  std::uint64_t product = 1;
  for (int k = 0; k < M; ++k) {
    const std::uint64_t fc =
        feedback_map_count(problem.state_size(t0 + k), problem.control_size(t0 + k));
    graph.feedback_counts[static_cast<std::size_t>(k)] = fc;
    if (fc > opts.law_cap) {
      std::ostringstream os;
      os << "reachable_laws: stage " << (t0 + k) << " has " << fc
         << " feedback maps, above the cap of " << opts.law_cap;
      throw CapExceededError(os.str(), fc, opts.law_cap);
    }
    product = (product > kMax / fc) ? kMax : product * fc;
    if (product > opts.law_cap) {
      std::ostringstream os;
      os << "reachable_laws: up to " << product
         << " laws reachable through stage " << (t0 + k + 1) << ", above the cap of "
         << opts.law_cap;
      throw CapExceededError(os.str(), product, opts.law_cap);
    }
  }

  graph.laws.resize(static_cast<std::size_t>(M) + 1);
  graph.child.resize(static_cast<std::size_t>(M));
  graph.laws[0].push_back(initial);
  for (int k = 0; k < M; ++k) {
    const int t = t0 + k;
    const int nx = problem.state_size(t);
    const int nu = problem.control_size(t);
    const std::uint64_t fc = graph.feedback_counts[static_cast<std::size_t>(k)];
    std::unordered_map<std::string, int> seen;
    std::vector<Law>& parents = graph.laws[static_cast<std::size_t>(k)];
    std::vector<Law>& children = graph.laws[static_cast<std::size_t>(k) + 1];
    graph.child[static_cast<std::size_t>(k)].resize(parents.size());
    for (std::size_t i = 0; i < parents.size(); ++i) {
      std::vector<int>& edges = graph.child[static_cast<std::size_t>(k)][i];
      edges.resize(static_cast<std::size_t>(fc));
      for (std::uint64_t fid = 0; fid < fc; ++fid) {
        const std::vector<int> phi = decode_feedback(fid, nx, nu);
        Law next = push_forward(problem, t, phi, parents[i]);
        const std::string key = law_key(next.weights, opts.law_quantum);
        auto [it, inserted] = seen.emplace(key, static_cast<int>(children.size()));
        if (inserted) children.push_back(std::move(next));
        edges[static_cast<std::size_t>(fid)] = it->second;
      }
    }
  }
  return graph;
}

ReachableLawGraph reachable_laws(const ConstrainedProblem& problem, const Law& initial,
                                 const LawDpOptions& opts) {
  return reachable_laws(problem.base, initial, opts);
}

const std::vector<int>* LawPolicy::feedback_for(const Law& mu) const {
  const int k = mu.stage - first_stage;
  if (k < 0 || k >= num_stages()) return nullptr;
  const auto& table = stage_maps[static_cast<std::size_t>(k)];
  const auto it = table.find(law_key(mu.weights, quantum));
  return it == table.end() ? nullptr : &it->second;
}

ConstrainedSolution solve_constrained(const ConstrainedProblem& problem, const Law& initial,
                                      const LawDpOptions& opts) {
  const FiniteSOCProblem& base = problem.base;
  if (static_cast<int>(problem.constraint.g.size()) != base.state_size(base.last_stage()))
    throw std::invalid_argument(
        "solve_constrained: constraint function does not match the final state space");

  ConstrainedSolution sol;
  sol.graph = reachable_laws(base, initial, opts);
  const int t0 = sol.graph.first_stage;
  const int M = sol.graph.num_stages();

  sol.law_policy.first_stage = t0;
  sol.law_policy.quantum = opts.law_quantum;
  sol.law_policy.stage_maps.resize(static_cast<std::size_t>(M));
  sol.law_value.resize(static_cast<std::size_t>(M) + 1);
  sol.best_feedback.resize(static_cast<std::size_t>(M));

  // Terminal layer: pair with the final cost where the constraint holds.
  {
    const std::vector<Law>& terminal = sol.graph.laws[static_cast<std::size_t>(M)];
    std::vector<std::optional<double>>& values = sol.law_value[static_cast<std::size_t>(M)];
    values.resize(terminal.size());
    const std::vector<double>& K = base.final_cost();
    const std::vector<double>& g = problem.constraint.g;
    for (std::size_t i = 0; i < terminal.size(); ++i) {
      const std::vector<double>& mu = terminal[i].weights;
      double load = 0.0, cost = 0.0;
      for (std::size_t x = 0; x < mu.size(); ++x) {
        load += g[x] * mu[x];
        cost += K[x] * mu[x];
      }
      if (load <= problem.constraint.level + opts.feasibility_tol) values[i] = cost;
    }
  }

  for (int k = M - 1; k >= 0; --k) {
    const int t = t0 + k;
    const int nx = base.state_size(t);
    const int nu = base.control_size(t);
    const int nw = base.noise_size(t);
    const std::uint64_t fc = sol.graph.feedback_counts[static_cast<std::size_t>(k)];

    // Expected one-transition cost of (state, control), shared by all laws.
    std::vector<double> e(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nu), 0.0);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) {
        double acc = 0.0;
        for (int w = 0; w < nw; ++w)
          acc += base.noise_law(t)[static_cast<std::size_t>(w)] * base.stage_cost(t)(x, u, w);
        e[static_cast<std::size_t>(x) * nu + u] = acc;
      }

    const std::vector<Law>& laws = sol.graph.laws[static_cast<std::size_t>(k)];
    const std::vector<std::optional<double>>& next_values =
        sol.law_value[static_cast<std::size_t>(k) + 1];
    std::vector<std::optional<double>>& values = sol.law_value[static_cast<std::size_t>(k)];
    std::vector<std::int64_t>& best = sol.best_feedback[static_cast<std::size_t>(k)];
    values.resize(laws.size());
    best.assign(laws.size(), -1);

    std::vector<double> q(static_cast<std::size_t>(fc));
    std::vector<char> ok(static_cast<std::size_t>(fc));
    for (std::size_t i = 0; i < laws.size(); ++i) {
      const std::vector<double>& mu = laws[i].weights;
      const std::vector<int>& edges = sol.graph.child[static_cast<std::size_t>(k)][i];
      double qmin = std::numeric_limits<double>::infinity();
      bool any = false;
      for (std::uint64_t fid = 0; fid < fc; ++fid) {
        const std::optional<double>& tail =
            next_values[static_cast<std::size_t>(edges[static_cast<std::size_t>(fid)])];
        if (!tail.has_value()) {
          ok[static_cast<std::size_t>(fid)] = 0;
          continue;
        }
        const std::vector<int> phi = decode_feedback(fid, nx, nu);
        double stage = 0.0;
        for (int x = 0; x < nx; ++x)
          stage += mu[static_cast<std::size_t>(x)] *
                   e[static_cast<std::size_t>(x) * nu + phi[static_cast<std::size_t>(x)]];
        const double total = stage + *tail;
        q[static_cast<std::size_t>(fid)] = total;
        ok[static_cast<std::size_t>(fid)] = 1;
        any = true;
        if (total < qmin) qmin = total;
      }
      if (!any) continue;  // every continuation violates the constraint
      std::uint64_t chosen = 0;
      while (!ok[static_cast<std::size_t>(chosen)] ||
             q[static_cast<std::size_t>(chosen)] > qmin + kTieTolerance)
        ++chosen;
      values[i] = qmin;
      best[i] = static_cast<std::int64_t>(chosen);
      sol.law_policy.stage_maps[static_cast<std::size_t>(k)].emplace(
          law_key(mu, opts.law_quantum), decode_feedback(chosen, nx, nu));
    }
  }

  sol.value = sol.law_value[0][0];
  return sol;
}

InducedPlan induced_plan(const ConstrainedSolution& solution, const Law& initial) {
  if (!solution.feasible())
    throw InfeasibleError("induced_plan: the constrained problem is infeasible");
  const ReachableLawGraph& graph = solution.graph;
  const double quantum = solution.law_policy.quantum;
  if (initial.stage != graph.first_stage ||
      law_key(initial.weights, quantum) != law_key(graph.laws[0][0].weights, quantum))
    throw std::invalid_argument("induced_plan: law does not match the solution's root");

  InducedPlan plan;
  int i = 0;
  for (int k = 0; k < graph.num_stages(); ++k) {
    const Law& law = graph.laws[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    const std::int64_t fid =
        solution.best_feedback[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    const std::vector<int>* phi = solution.law_policy.feedback_for(law);
    if (fid < 0 || phi == nullptr)
      throw std::logic_error("induced_plan: feasible solution lacks an argmin edge");
    plan.steps.push_back(PlanStep{law, *phi});
    i = graph.child[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]
                   [static_cast<std::size_t>(fid)];
  }
  plan.final_law =
      graph.laws[static_cast<std::size_t>(graph.num_stages())][static_cast<std::size_t>(i)];
  return plan;
}

}  // namespace socdp
