#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "socdp/law.hpp"
#include "socdp/problem.hpp"

namespace socdp {

inline constexpr std::uint64_t kDefaultLawCap = 1'000'000;
inline constexpr double kDefaultLawQuantum = 1e-12;
inline constexpr double kDefaultFeasibilityTol = 1e-9;

// Terminal expectation constraint: require E[g(x_T)] <= level.
struct ExpectationConstraint {
  std::vector<double> g;  // one entry per final-stage state
  double level = 0.0;
};

struct ConstrainedProblem {
  FiniteSOCProblem base;
  ExpectationConstraint constraint;
};

// Chance constraint P(h(x_T) >= b) <= pi as an expectation constraint on the
// indicator: g[x] = 1 when h[x] >= b, else 0; level = pi.
ExpectationConstraint make_chance_constraint(const std::vector<double>& h, double b, double pi);

// One stagewise event "g(x) >= b" of a joint chance constraint.
struct StageThreshold {
  std::vector<double> g;
  double b = 0.0;
};

// Joint chance constraint P(g_t(x_t) >= b_t for all t > t0) <= pi, encoded by
// a binary survival flag carried alongside the state. `thresholds` holds one
// entry per stage t0+1 .. T, in order. States at those stages become pairs
// (x, y) laid out as index x + y * nx; the flag starts at 1 (implicit at the
// unaugmented stage t0), is multiplied by each stage's indicator as the state
// arrives there, and the constraint becomes E[y_T] <= pi. Costs ignore y.
ConstrainedProblem augment_joint_chance(const FiniteSOCProblem& problem,
                                        const std::vector<StageThreshold>& thresholds,
                                        double pi);

struct LawDpOptions {
  std::uint64_t law_cap = kDefaultLawCap;
  double law_quantum = kDefaultLawQuantum;
  double feasibility_tol = kDefaultFeasibilityTol;
};

// Feedback maps at one stage are ranked lexicographically: the map assigning
// control u_x to state x has id  sum_x u_x * nu^(nx-1-x)  (state 0 varies
// slowest). These helpers convert between the two forms.
std::uint64_t feedback_map_count(int nx, int nu);  // nu^nx, saturating
std::vector<int> decode_feedback(std::uint64_t id, int nx, int nu);
std::uint64_t encode_feedback(const std::vector<int>& feedback, int nu);

// All laws attainable from a root law by stagewise push_forward steps, any
// feedback maps, de-duplicated per stage by quantized coordinates. Edges
// record where each (law, feedback id) pair leads.
struct ReachableLawGraph {
  int first_stage = 0;
  std::vector<std::vector<Law>> laws;  // laws[k]: distinct laws at stage first_stage + k
  // child[k][i][fid]: index into laws[k+1] of the push-forward of laws[k][i]
  // under feedback map fid.
  std::vector<std::vector<std::vector<int>>> child;
  std::vector<std::uint64_t> feedback_counts;  // one per transition stage

  int num_stages() const { return static_cast<int>(child.size()); }
};

ReachableLawGraph reachable_laws(const FiniteSOCProblem& problem, const Law& initial,
                                 const LawDpOptions& opts = {});
ReachableLawGraph reachable_laws(const ConstrainedProblem& problem, const Law& initial,
                                 const LawDpOptions& opts = {});

// Feedback maps keyed by the quantized law they respond to; one table per
// transition stage. Defined on exactly the reachable laws whose constrained
// continuation is feasible.
class LawPolicy {
 public:
  int first_stage = 0;
  double quantum = kDefaultLawQuantum;
  std::vector<std::unordered_map<std::string, std::vector<int>>> stage_maps;

  int num_stages() const { return static_cast<int>(stage_maps.size()); }

  // The feedback recorded for this law, or nullptr when the law was never
  // reached (or has no feasible continuation).
  const std::vector<int>* feedback_for(const Law& mu) const;
};

// Result of exact dynamic programming over the reachable-law graph.
// `value` is empty when no feedback sequence satisfies the constraint from
// the root law (the INFEASIBLE verdict); per-law values mirror that variant.
struct ConstrainedSolution {
  std::optional<double> value;
  LawPolicy law_policy;
  ReachableLawGraph graph;
  std::vector<std::vector<std::optional<double>>> law_value;  // law_value[k][i]
  std::vector<std::vector<std::int64_t>> best_feedback;       // feedback id, -1 when none

  bool feasible() const { return value.has_value(); }
};

// Exact constrained solve:
//   V_T(mu)  = <K, mu>                      when <g, mu> <= level + feasibility_tol,
//              INFEASIBLE                   otherwise;
//   V_t(mu)  = min over feedback maps of  <Lambda, mu> + V_{t+1}(pushforward)
// with minima grouped within kTieTolerance and ties broken toward the
// smallest feedback id. The initial law may live at any stage of the
// problem; later stages solve the tail subproblem under the same constraint.
ConstrainedSolution solve_constrained(const ConstrainedProblem& problem, const Law& initial,
                                      const LawDpOptions& opts = {});

// One stage of the optimal law trajectory: the law reached and the feedback
// applied on the transition leaving it.
struct PlanStep {
  Law law;
  std::vector<int> feedback;
};

struct InducedPlan {
  std::vector<PlanStep> steps;  // one per transition stage
  Law final_law;
};

// Walks the argmin edges of a feasible solution from its root law. Throws
// InfeasibleError on an INFEASIBLE solution, std::invalid_argument when
// `initial` does not match the solution's root law after quantization.
InducedPlan induced_plan(const ConstrainedSolution& solution, const Law& initial);

}  // namespace socdp
