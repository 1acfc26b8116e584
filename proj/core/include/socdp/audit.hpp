#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "socdp/constrained.hpp"
#include "socdp/generators.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"

namespace socdp {

inline constexpr double kDefaultAuditTol = 1e-9;

// A gap more negative than this indicates a solver bug: the audited
// continuation is admissible for the subproblem, so the subproblem optimum
// can never exceed its value.
inline constexpr double kGapNonnegativityTol = 1e-12;

enum class Verdict { kConsistent, kInconsistent };

// One audited restart: the subproblem re-solved at (stage, restart point)
// against the value of continuing with the originally optimal decisions.
// Empty optionals mean the corresponding branch violates the constraint;
// the gap is +infinity when only the continuation does.
struct AuditWitness {
  int stage = 0;
  std::variant<int, Law> restart;  // Dirac state index, or the full restart law
  std::optional<double> subproblem_value;
  std::optional<double> original_value;
  double gap = 0.0;
};

struct AuditReport {
  Verdict verdict = Verdict::kConsistent;
  std::vector<AuditWitness> witnesses;  // every audited restart, sorted by (stage, restart)
  double tolerance = kDefaultAuditTol;
  double max_gap = 0.0;

  bool consistent() const { return verdict == Verdict::kConsistent; }
};

// Checks that the stage-t0 optimal feedback remains optimal for every
// truncated problem restarted at a state the policy visits with positive
// probability. `initial` narrows the visited set; by default every state at
// t0 is a possible start. Gaps compare the original policy's cost-to-go with
// an independent re-solve of the truncated problem.
AuditReport audit_unconstrained(const FiniteSOCProblem& problem,
                                std::optional<Law> initial = std::nullopt,
                                double tolerance = kDefaultAuditTol);

// Audits the constrained problem under the "observed state only" information
// structure: restarts at Dirac points drawn from the optimal plan's law,
// keeping the constraint level fixed. Throws InfeasibleError when the stage-t0
// problem itself is infeasible (no verdict applies).
AuditReport audit_constrained_naive(const ConstrainedProblem& problem, const Law& initial,
                                    const LawDpOptions& opts = {},
                                    double tolerance = kDefaultAuditTol);

// Audits the constrained problem under the richer information structure where
// decisions may depend on the state's probability law: restarts at the
// optimal plan's law itself. Throws InfeasibleError on an infeasible root.
AuditReport audit_constrained_law(const ConstrainedProblem& problem, const Law& initial,
                                  const LawDpOptions& opts = {},
                                  double tolerance = kDefaultAuditTol);

// Rolls a noise-free problem forward, re-solving at every stage from the
// realized state. `overrides` holds one entry per arrival stage t0+1 .. T; an
// engaged entry forces that stage's realized state (a modelling error made
// concrete), an empty one keeps the planned transition. Gaps compare the
// original open-loop plan's tail from the realized state with the re-solve.
AuditReport audit_deterministic_rolling(const FiniteSOCProblem& problem, int initial_state,
                                        const std::vector<std::optional<int>>& overrides,
                                        double tolerance = kDefaultAuditTol);

// One instance where the two information structures genuinely disagree:
// Dirac restarts flag INCONSISTENT while law restarts certify CONSISTENT.
struct WitnessSearchResult {
  ConstrainedInstance instance;
  std::uint64_t seed = 0;      // the candidate's own seed (base_seed + index)
  int candidate_index = 0;
  AuditReport naive_report;
  AuditReport law_report;
};

// Seeded search over small chance-constrained instances (2-3 states, 2
// controls, 2 noise points, 2-3 transitions, binding constraint). Candidate k
// is generated from seed base_seed + k, so any hit is reproducible in
// isolation. Finite-gap witnesses are preferred over ones whose naive
// continuation is infeasible outright; the first finite hit wins.
std::optional<WitnessSearchResult> search_inconsistency_witness(
    std::uint64_t base_seed, int max_candidates, double min_gap = 1e-6,
    const LawDpOptions& opts = {}, double tolerance = kDefaultAuditTol);

}  // namespace socdp
