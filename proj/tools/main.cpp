// Command-line front end: scenario validation, solving, audits, level
// sweeps, and instance generation. See docs/scenario-schema.md for the
// scenario format and README.md for examples.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "socdp/audit.hpp"
#include "socdp/errors.hpp"
#include "socdp/generators.hpp"
#include "socdp/scenario.hpp"

namespace {

struct CommonFlags {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> cap;
  std::optional<double> tol;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_scenario) {
  CLI::Option* scenario =
      cmd->add_option("--scenario", flags.scenario_path, "Scenario JSON file");
  if (needs_scenario) scenario->required();
  cmd->add_option("--out", flags.out_dir, "Output directory (default: current directory)");
  cmd->add_option("--seed", flags.seed, "Override the scenario's seed");
  cmd->add_option("--cap", flags.cap,
                  "Override both enumeration caps (policies and reachable laws)");
  cmd->add_option("--tol", flags.tol, "Override the consistency gap tolerance");
}

// Applies flag overrides on top of the loaded scenario.
void apply_overrides(socdp::Scenario& scenario, const CommonFlags& flags) {
  if (flags.seed.has_value()) scenario.seed = *flags.seed;
  if (flags.cap.has_value()) {
    scenario.caps.policies = *flags.cap;
    scenario.caps.laws = *flags.cap;
  }
  if (flags.tol.has_value()) scenario.tolerances.gap = *flags.tol;
}

int run_and_report(const socdp::Scenario& scenario, const std::string& out_dir) {
  std::string diagnostics;
  const int code = socdp::run_scenario(scenario, out_dir, diagnostics);
  if (code == 0) {
    const char* artifact = "solution.json";
    switch (scenario.experiment) {
      case socdp::ExperimentKind::kSolve: artifact = "solution.json"; break;
      case socdp::ExperimentKind::kSweep: artifact = "sweep.csv"; break;
      default: artifact = "audit.json"; break;
    }
    std::cout << "wrote " << (std::filesystem::path(out_dir) / artifact).string() << "\n";
  } else if (code == 2) {
    // Infeasibility is a result, not a failure; artifacts were still written.
    std::cout << "INFEASIBLE: " << diagnostics << "\n";
  } else {
    std::cerr << "error: " << diagnostics << "\n";
  }
  return code;
}

socdp::Scenario scenario_from_instance(const socdp::ConstrainedInstance& instance,
                                       std::string name) {
  socdp::Scenario scenario{std::move(name),
                           instance.problem.base,
                           socdp::ChanceForm{instance.h, instance.b, instance.pi},
                           instance.initial_state,
                           socdp::ExperimentKind::kAuditNaive,
                           {},
                           {},
                           0,
                           socdp::Caps{},
                           socdp::Tolerances{}};
  return scenario;
}

int generate(const std::string& kind, std::uint64_t seed, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "scenario.json").string();

  if (kind == "random") {
    socdp::Rng rng(seed);
    socdp::Scenario scenario{"random-" + std::to_string(seed),
                             socdp::random_problem(rng),
                             std::nullopt,
                             0,
                             socdp::ExperimentKind::kSolve,
                             {},
                             {},
                             seed,
                             socdp::Caps{},
                             socdp::Tolerances{}};
    scenario.initial = socdp::uniform_index(
        rng, scenario.problem.state_size(scenario.problem.first_stage()));
    socdp::save_scenario(scenario, path);
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (kind == "detgrid") {
    const socdp::MultiplicativeGridInstance instance = socdp::make_multiplicative_grid();
    const int t0 = instance.problem.first_stage();
    socdp::Scenario scenario{"multiplicative-grid",
                             instance.problem,
                             std::nullopt,
                             instance.state_of(t0, 1.0),
                             socdp::ExperimentKind::kAuditRolling,
                             {},
                             {},
                             seed,
                             socdp::Caps{},
                             socdp::Tolerances{}};
    // Kick the first arrival off the planned path; the multiplicative
    // structure keeps the re-solved controls identical anyway.
    scenario.rolling_overrides.assign(
        static_cast<std::size_t>(instance.problem.num_stages()), std::nullopt);
    scenario.rolling_overrides[0] = 0;
    socdp::save_scenario(scenario, path);
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (kind == "witness") {
    const std::optional<socdp::WitnessSearchResult> hit =
        socdp::search_inconsistency_witness(seed, 10000);
    if (!hit.has_value()) {
      std::cerr << "error: no inconsistency witness within 10000 candidates from seed " << seed
                << "\n";
      return 1;
    }
    socdp::Scenario scenario = scenario_from_instance(
        hit->instance, "inconsistency-witness-" + std::to_string(hit->seed));
    scenario.seed = hit->seed;
    socdp::save_scenario(scenario, path);
    std::cout << "wrote " << path << " (candidate " << hit->candidate_index << ", seed "
              << hit->seed << ", naive max gap " << hit->naive_report.max_gap << ")\n";
    return 0;
  }

  std::cerr << "error: unknown generate kind \"" << kind
            << "\" (expected random, detgrid, witness)\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-space stochastic optimal control: exact solvers and "
               "time-consistency audits"};
  app.require_subcommand(1);

  CommonFlags validate_flags;
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file and report issues");
  add_common(validate, validate_flags, true);

  CommonFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "Solve the scenario's problem");
  add_common(solve, solve_flags, true);

  CommonFlags audit_flags;
  std::string audit_kind;
  CLI::App* audit = app.add_subcommand("audit", "Run a time-consistency audit");
  add_common(audit, audit_flags, true);
  audit->add_option("--kind", audit_kind,
                    "Audit to run: unconstrained, naive, law, rolling "
                    "(default: the scenario's experiment)");

  CommonFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the constraint level and tabulate");
  add_common(sweep, sweep_flags, true);

  std::string generate_kind = "random";
  CommonFlags generate_flags;
  CLI::App* gen = app.add_subcommand("generate", "Write a ready-to-run scenario file");
  gen->add_option("--kind", generate_kind, "random, detgrid, or witness");
  gen->add_option("--out", generate_flags.out_dir, "Output directory");
  gen->add_option("--seed", generate_flags.seed, "Generator seed (default 0)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      try {
        socdp::load_scenario(validate_flags.scenario_path);
      } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
      }
      std::cout << "OK: " << validate_flags.scenario_path << "\n";
      return 0;
    }

    if (solve->parsed()) {
      socdp::Scenario scenario = socdp::load_scenario(solve_flags.scenario_path);
      apply_overrides(scenario, solve_flags);
      scenario.experiment = socdp::ExperimentKind::kSolve;
      return run_and_report(scenario, solve_flags.out_dir);
    }

    if (audit->parsed()) {
      socdp::Scenario scenario = socdp::load_scenario(audit_flags.scenario_path);
      apply_overrides(scenario, audit_flags);
      if (!audit_kind.empty()) {
        if (audit_kind == "unconstrained")
          scenario.experiment = socdp::ExperimentKind::kAuditUnconstrained;
        else if (audit_kind == "naive")
          scenario.experiment = socdp::ExperimentKind::kAuditNaive;
        else if (audit_kind == "law")
          scenario.experiment = socdp::ExperimentKind::kAuditLaw;
        else if (audit_kind == "rolling")
          scenario.experiment = socdp::ExperimentKind::kAuditRolling;
        else {
          std::cerr << "error: unknown audit kind \"" << audit_kind
                    << "\" (expected unconstrained, naive, law, rolling)\n";
          return 1;
        }
      }
      switch (scenario.experiment) {
        case socdp::ExperimentKind::kAuditUnconstrained:
        case socdp::ExperimentKind::kAuditNaive:
        case socdp::ExperimentKind::kAuditLaw:
        case socdp::ExperimentKind::kAuditRolling: break;
        default:
          std::cerr << "error: scenario's experiment is \""
                    << socdp::to_string(scenario.experiment)
                    << "\"; pass --kind to choose an audit\n";
          return 1;
      }
      return run_and_report(scenario, audit_flags.out_dir);
    }

    if (sweep->parsed()) {
      socdp::Scenario scenario = socdp::load_scenario(sweep_flags.scenario_path);
      apply_overrides(scenario, sweep_flags);
      scenario.experiment = socdp::ExperimentKind::kSweep;
      return run_and_report(scenario, sweep_flags.out_dir);
    }

    if (gen->parsed())
      return generate(generate_kind, generate_flags.seed.value_or(0), generate_flags.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
