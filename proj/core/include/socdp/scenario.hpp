#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "socdp/constrained.hpp"
#include "socdp/dp.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"

namespace socdp {

enum class ExperimentKind {
  kSolve,
  kAuditUnconstrained,
  kAuditNaive,
  kAuditLaw,
  kAuditRolling,
  kSweep,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

// Constraint block as authored, preserved so scenarios round-trip exactly.
struct ExpectationForm {
  std::vector<double> g;
  double level = 0.0;
};
struct ChanceForm {
  std::vector<double> h;
  double threshold = 0.0;
  double probability = 0.0;
};
struct JointChanceForm {
  std::vector<StageThreshold> thresholds;  // one per stage after the first
  double probability = 0.0;
};
using ConstraintSpec = std::variant<ExpectationForm, ChanceForm, JointChanceForm>;

struct Caps {
  std::uint64_t policies = kDefaultPolicyCap;
  std::uint64_t laws = kDefaultLawCap;
};

struct Tolerances {
  double gap = 1e-9;
  double feasibility = kDefaultFeasibilityTol;
  double law_quantum = kDefaultLawQuantum;
};

// Everything one experiment needs, loadable from and savable to JSON.
struct Scenario {
  std::string name;
  FiniteSOCProblem problem;
  std::optional<ConstraintSpec> constraint;
  std::variant<int, Law> initial = 0;  // Dirac state index, or a full law at t0
  ExperimentKind experiment = ExperimentKind::kSolve;
  std::vector<double> sweep_levels;                  // sweep experiments
  std::vector<std::optional<int>> rolling_overrides;  // rolling audits, one per arrival stage
  std::uint64_t seed = 0;
  Caps caps;
  Tolerances tolerances;
};

// Parses and fully validates; throws std::runtime_error with line/field
// diagnostics on parse errors and an exhaustive issue list on validation
// failures. `origin` names the source in messages (a path, or "<memory>").
Scenario parse_scenario(const std::string& json_text, const std::string& origin);
Scenario load_scenario(const std::string& path);

std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

// The scenario's initial condition as a law on the first-stage state space.
Law initial_law(const Scenario& scenario);

// Applies the constraint block to the problem. Throws when the scenario has
// no constraint. For joint-chance forms this augments the state space, so
// the result's base may differ from scenario.problem; `initial_law` values
// remain valid because the first stage is never augmented.
ConstrainedProblem build_constrained(const Scenario& scenario);

// Same, with the constraint level (expectation level or probability bound)
// replaced by `level` — the sweep primitive.
ConstrainedProblem build_constrained_at_level(const Scenario& scenario, double level);

LawDpOptions law_options(const Scenario& scenario);

// Runs the scenario's experiment, writing artifacts into out_dir:
// solution.json for solves, audit.json for audits, sweep.csv for sweeps.
// Returns the process exit code: 0 done, 2 infeasible, 1 error. Error text
// goes to `diagnostics` so callers can route it.
int run_scenario(const Scenario& scenario, const std::string& out_dir,
                 std::string& diagnostics);

}  // namespace socdp
