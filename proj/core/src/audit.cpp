#include "socdp/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "socdp/dp.hpp"
#include "socdp/errors.hpp"
#include "socdp/fokker_planck.hpp"

namespace socdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_gap_sign(double gap) {
  if (gap < -kGapNonnegativityTol)
    throw std::logic_error(
        "audit: a subproblem optimum exceeded the value of an admissible continuation");
}

void finalize(AuditReport& report) {
  report.max_gap = 0.0;
  for (const AuditWitness& w : report.witnesses)
    report.max_gap = std::max(report.max_gap, w.gap);
  report.verdict =
      report.max_gap > report.tolerance ? Verdict::kInconsistent : Verdict::kConsistent;
}

// Terminal load <g, mu_T> and total cost of running `policy` from `mu`.
struct ContinuationOutcome {
  double value = 0.0;
  double constraint_load = 0.0;
};

ContinuationOutcome run_continuation(const FiniteSOCProblem& problem,
                                     const std::vector<std::vector<int>>& feedbacks,
                                     const Law& start, const std::vector<double>& g) {
  ContinuationOutcome out;
  Law mu = start;
  for (int t = start.stage; t < problem.last_stage(); ++t) {
    const std::vector<int>& phi = feedbacks[static_cast<std::size_t>(t - start.stage)];
    out.value += pairing(stage_cost_functional(problem, t, phi), mu);
    mu = push_forward(problem, t, phi, mu);
  }
  for (std::size_t x = 0; x < mu.weights.size(); ++x) {
    out.value += problem.final_cost()[x] * mu.weights[x];
    out.constraint_load += g[x] * mu.weights[x];
  }
  return out;
}

}  // namespace

AuditReport audit_unconstrained(const FiniteSOCProblem& problem, std::optional<Law> initial,
                                double tolerance) {
  require_valid(problem);
  const int t0 = problem.first_stage();
  Law mu;
  if (initial.has_value()) {
    mu = *std::move(initial);
    if (mu.stage != t0)
      throw std::invalid_argument("audit_unconstrained: initial law is not at the first stage");
    require_law(mu, problem.state_size(t0));
  } else {
    // Any state may be the start: weight them evenly so the visited set is
    // the union over all Dirac starts.
    const int nx = problem.state_size(t0);
    mu.stage = t0;
    mu.weights.assign(static_cast<std::size_t>(nx), 1.0 / nx);
  }

  const DpSolution sol = solve_dp(problem);
  // Cost-to-go of the fixed optimal policy, one backward sweep.
  const CostToGo restricted = backward_cost(problem, sol.policy, mu).psi;

  AuditReport report;
  report.tolerance = tolerance;
  for (int t = t0 + 1; t < problem.last_stage(); ++t) {
    mu = push_forward(problem, t - 1, sol.policy.at(t - 1), mu);
    const DpSolution sub = solve_dp(truncate(problem, t));
    for (int x = 0; x < problem.state_size(t); ++x) {
      if (mu.weights[static_cast<std::size_t>(x)] <= kSupportTol) continue;
      AuditWitness w;
      w.stage = t;
      w.restart = x;
      w.subproblem_value = sub.value.at(t, x);
      w.original_value = restricted.at(t, x);
      w.gap = *w.original_value - *w.subproblem_value;
      check_gap_sign(w.gap);
      report.witnesses.push_back(std::move(w));
    }
  }
  finalize(report);
  return report;
}

AuditReport audit_constrained_naive(const ConstrainedProblem& problem, const Law& initial,
                                    const LawDpOptions& opts, double tolerance) {
  const ConstrainedSolution root = solve_constrained(problem, initial, opts);
  if (!root.feasible())
    throw InfeasibleError("audit_constrained_naive: the stage-" + std::to_string(initial.stage) +
                          " problem is infeasible, no consistency verdict applies");
  const InducedPlan plan = induced_plan(root, initial);
  const FiniteSOCProblem& base = problem.base;
  const int t0 = initial.stage;
  const int M = static_cast<int>(plan.steps.size());

  AuditReport report;
  report.tolerance = tolerance;
  for (int k = 1; k < M; ++k) {
    const int t = t0 + k;
    const Law& law = plan.steps[static_cast<std::size_t>(k)].law;
    // Original-plan feedbacks from stage t on.
    std::vector<std::vector<int>> tail;
    for (int j = k; j < M; ++j)
      tail.push_back(plan.steps[static_cast<std::size_t>(j)].feedback);

    for (int x = 0; x < law.size(); ++x) {
      if (law.weights[static_cast<std::size_t>(x)] <= kSupportTol) continue;
      const Law restart = dirac_law(t, law.size(), x);
      const ConstrainedSolution sub = solve_constrained(problem, restart, opts);
      const ContinuationOutcome cont =
          run_continuation(base, tail, restart, problem.constraint.g);
      const bool cont_feasible =
          cont.constraint_load <= problem.constraint.level + opts.feasibility_tol;

      AuditWitness w;
      w.stage = t;
      w.restart = x;
      w.subproblem_value = sub.value;
      if (cont_feasible) w.original_value = cont.value;
      if (sub.feasible() && cont_feasible) {
        w.gap = cont.value - *sub.value;
        check_gap_sign(w.gap);
      } else if (sub.feasible()) {
        // The plan's own decisions break the constraint from this restart.
        w.gap = kInf;
      } else if (cont_feasible) {
        throw std::logic_error(
            "audit_constrained_naive: a feasible continuation exists but the re-solve "
            "reported infeasibility");
      } else {
        w.gap = 0.0;  // nothing to compare: no admissible continuation either way
      }
      report.witnesses.push_back(std::move(w));
    }
  }
  finalize(report);
  return report;
}

AuditReport audit_constrained_law(const ConstrainedProblem& problem, const Law& initial,
                                  const LawDpOptions& opts, double tolerance) {
  const ConstrainedSolution root = solve_constrained(problem, initial, opts);
  if (!root.feasible())
    throw InfeasibleError("audit_constrained_law: the stage-" + std::to_string(initial.stage) +
                          " problem is infeasible, no consistency verdict applies");
  const InducedPlan plan = induced_plan(root, initial);
  const FiniteSOCProblem& base = problem.base;
  const int t0 = initial.stage;
  const int M = static_cast<int>(plan.steps.size());

  AuditReport report;
  report.tolerance = tolerance;
  for (int k = 1; k < M; ++k) {
    const int t = t0 + k;
    const Law& law = plan.steps[static_cast<std::size_t>(k)].law;
    std::vector<std::vector<int>> tail;
    for (int j = k; j < M; ++j)
      tail.push_back(plan.steps[static_cast<std::size_t>(j)].feedback);

    const ConstrainedSolution sub = solve_constrained(problem, law, opts);
    const ContinuationOutcome cont = run_continuation(base, tail, law, problem.constraint.g);
    if (cont.constraint_load > problem.constraint.level + opts.feasibility_tol)
      throw std::logic_error(
          "audit_constrained_law: the optimal plan's own continuation violates the constraint");
    if (!sub.feasible())
      throw std::logic_error(
          "audit_constrained_law: a feasible continuation exists but the re-solve reported "
          "infeasibility");

    AuditWitness w;
    w.stage = t;
    w.restart = law;
    w.subproblem_value = sub.value;
    w.original_value = cont.value;
    w.gap = cont.value - *sub.value;
    check_gap_sign(w.gap);
    report.witnesses.push_back(std::move(w));
  }
  finalize(report);
  return report;
}

AuditReport audit_deterministic_rolling(const FiniteSOCProblem& problem, int initial_state,
                                        const std::vector<std::optional<int>>& overrides,
                                        double tolerance) {
  require_valid(problem);
  if (!problem.is_deterministic())
    throw std::invalid_argument(
        "audit_deterministic_rolling: the problem has a non-singleton noise space");
  const int t0 = problem.first_stage();
  const int N = problem.num_stages();
  if (static_cast<int>(overrides.size()) != N)
    throw std::invalid_argument(
        "audit_deterministic_rolling: need one override slot per arrival stage");
  for (int k = 0; k < N; ++k)
    if (overrides[static_cast<std::size_t>(k)].has_value()) {
      const int forced = *overrides[static_cast<std::size_t>(k)];
      if (forced < 0 || forced >= problem.state_size(t0 + k + 1))
        throw std::invalid_argument("audit_deterministic_rolling: override state out of range");
    }

  const OpenLoopPlan original = solve_deterministic(problem, initial_state);

  AuditReport report;
  report.tolerance = tolerance;
  int x = initial_state;
  // The control actually applied at each stage comes from the freshest
  // re-solve; comparisons are always against the original stage-t0 plan.
  std::vector<int> applied = original.controls;
  for (int k = 0; k < N; ++k) {
    const int t = t0 + k;
    const int u = applied[static_cast<std::size_t>(k)];
    const int planned_next = problem.dynamics(t)(x, u, 0);
    x = overrides[static_cast<std::size_t>(k)].value_or(planned_next);
    if (t + 1 == problem.last_stage()) break;

    const FiniteSOCProblem sub_problem = truncate(problem, t + 1);
    const OpenLoopPlan fresh = solve_deterministic(sub_problem, x);
    for (int j = k + 1; j < N; ++j)
      applied[static_cast<std::size_t>(j)] = fresh.controls[static_cast<std::size_t>(j - k - 1)];

    // Original open-loop tail replayed from the realized state. The sum is
    // accumulated from the horizon backward, mirroring the value recursion,
    // so an on-plan restart reproduces the re-solved cost bit for bit.
    std::vector<int> visited;
    int y = x;
    for (int j = k + 1; j < N; ++j) {
      visited.push_back(y);
      y = problem.dynamics(t0 + j)(y, original.controls[static_cast<std::size_t>(j)], 0);
    }
    double tail_cost = problem.final_cost()[static_cast<std::size_t>(y)];
    for (int j = N - 1; j > k; --j) {
      const int yj = visited[static_cast<std::size_t>(j - k - 1)];
      tail_cost = problem.stage_cost(t0 + j)(yj, original.controls[static_cast<std::size_t>(j)], 0) +
                  tail_cost;
    }

    AuditWitness w;
    w.stage = t + 1;
    w.restart = x;
    w.subproblem_value = fresh.cost;
    w.original_value = tail_cost;
    w.gap = tail_cost - fresh.cost;
    check_gap_sign(w.gap);
    report.witnesses.push_back(std::move(w));
  }
  finalize(report);
  return report;
}

std::optional<WitnessSearchResult> search_inconsistency_witness(std::uint64_t base_seed,
                                                                int max_candidates,
                                                                double min_gap,
                                                                const LawDpOptions& opts,
                                                                double tolerance) {
  std::optional<WitnessSearchResult> fallback;  // first hit whose only gaps are infinite
  for (int k = 0; k < max_candidates; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    Rng rng(seed);
    ConstrainedInstance instance = random_constrained_instance(rng);
    if (!constraint_binds(instance)) continue;

    AuditReport naive;
    try {
      naive = audit_constrained_naive(instance.problem, instance.initial, opts, tolerance);
    } catch (const InfeasibleError&) {
      continue;
    }
    if (naive.consistent()) continue;

    double best_finite = 0.0;
    for (const AuditWitness& w : naive.witnesses)
      if (std::isfinite(w.gap)) best_finite = std::max(best_finite, w.gap);
    const bool finite_hit = best_finite > min_gap;
    if (!finite_hit && !(naive.max_gap > min_gap)) continue;

    const AuditReport law =
        audit_constrained_law(instance.problem, instance.initial, opts, tolerance);
    if (!law.consistent() || !(law.max_gap < tolerance)) continue;

    WitnessSearchResult result{std::move(instance), seed, k, std::move(naive), law};
    if (finite_hit) return result;
    if (!fallback.has_value()) fallback = std::move(result);
  }
  return fallback;
}

}  // namespace socdp
