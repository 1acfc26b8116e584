#include "socdp/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "socdp/audit.hpp"
#include "socdp/errors.hpp"
#include "socdp/fokker_planck.hpp"
#include "socdp/json_writer.hpp"

namespace socdp {

namespace {

using nlohmann::json;

std::string to_string_verdict(Verdict v) {
  return v == Verdict::kConsistent ? "CONSISTENT" : "INCONSISTENT";
}

// Collects every problem found in one scenario so the load fails with the
// complete list instead of the first complaint.
struct IssueList {
  std::vector<std::string> items;

  void add(const std::string& path, const std::string& message) {
    items.push_back(path.empty() ? message : path + ": " + message);
  }
  bool empty() const { return items.empty(); }
};

[[noreturn]] void fail(const std::string& origin, const IssueList& issues) {
  std::ostringstream os;
  os << origin << ": invalid scenario:";
  for (const std::string& item : issues.items) os << "\n  - " << item;
  throw std::runtime_error(os.str());
}

bool get_int_field(const json& j, const char* name, const std::string& path, bool required,
                   long long fallback, long long& out, IssueList& issues) {
  out = fallback;
  const auto it = j.find(name);
  if (it == j.end()) {
    if (required) issues.add(path + name, "missing required field");
    return !required;
  }
  if (!it->is_number_integer()) {
    issues.add(path + name, "expected an integer");
    return false;
  }
  out = it->get<long long>();
  return true;
}

bool get_double_field(const json& j, const char* name, const std::string& path, bool required,
                      double fallback, double& out, IssueList& issues) {
  out = fallback;
  const auto it = j.find(name);
  if (it == j.end()) {
    if (required) issues.add(path + name, "missing required field");
    return !required;
  }
  if (!it->is_number()) {
    issues.add(path + name, "expected a number");
    return false;
  }
  out = it->get<double>();
  return true;
}

bool get_size_list(const json& j, const char* name, const std::string& origin_path,
                   std::vector<int>& out, IssueList& issues) {
  const auto it = j.find(name);
  if (it == j.end()) {
    issues.add(origin_path + name, "missing required field");
    return false;
  }
  if (!it->is_array() || it->empty()) {
    issues.add(origin_path + name, "expected a non-empty array of positive integers");
    return false;
  }
  out.clear();
  bool ok = true;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& e = (*it)[i];
    if (!e.is_number_integer() || e.get<long long>() < 1) {
      issues.add(origin_path + name + "[" + std::to_string(i) + "]",
                 "expected a positive integer");
      ok = false;
      continue;
    }
    out.push_back(e.get<int>());
  }
  return ok;
}

bool get_double_list(const json& node, const std::string& path, std::size_t expected,
                     std::vector<double>& out, IssueList& issues) {
  if (!node.is_array()) {
    issues.add(path, "expected an array of numbers");
    return false;
  }
  if (node.size() != expected) {
    issues.add(path, "expected " + std::to_string(expected) + " entries, found " +
                         std::to_string(node.size()));
    return false;
  }
  out.clear();
  bool ok = true;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      issues.add(path + "[" + std::to_string(i) + "]", "expected a number");
      ok = false;
      continue;
    }
    out.push_back(node[i].get<double>());
  }
  return ok;
}

// dynamics / stage_costs share the shape [stage][state][control][noise].
template <typename Store>
void read_stage_table(const json& outer, const std::string& field, const FiniteSOCProblem& p,
                      bool integer_entries, IssueList& issues, Store&& store) {
  const auto it = outer.find(field);
  if (it == outer.end()) {
    issues.add(field, "missing required field");
    return;
  }
  if (!it->is_array() || static_cast<int>(it->size()) != p.num_stages()) {
    issues.add(field, "expected one table per transition stage (" +
                          std::to_string(p.num_stages()) + ")");
    return;
  }
  for (int k = 0; k < p.num_stages(); ++k) {
    const int t = p.first_stage() + k;
    const json& table = (*it)[static_cast<std::size_t>(k)];
    const std::string tpath = field + "[" + std::to_string(k) + "]";
    if (!table.is_array() || static_cast<int>(table.size()) != p.state_size(t)) {
      issues.add(tpath, "expected " + std::to_string(p.state_size(t)) + " state rows");
      continue;
    }
    for (int x = 0; x < p.state_size(t); ++x) {
      const json& row = table[static_cast<std::size_t>(x)];
      const std::string xpath = tpath + "[" + std::to_string(x) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != p.control_size(t)) {
        issues.add(xpath, "expected " + std::to_string(p.control_size(t)) + " control rows");
        continue;
      }
      for (int u = 0; u < p.control_size(t); ++u) {
        const json& cell = row[static_cast<std::size_t>(u)];
        const std::string upath = xpath + "[" + std::to_string(u) + "]";
        if (!cell.is_array() || static_cast<int>(cell.size()) != p.noise_size(t)) {
          issues.add(upath, "expected " + std::to_string(p.noise_size(t)) + " noise entries");
          continue;
        }
        for (int w = 0; w < p.noise_size(t); ++w) {
          const json& v = cell[static_cast<std::size_t>(w)];
          const std::string wpath = upath + "[" + std::to_string(w) + "]";
          if (integer_entries ? !v.is_number_integer() : !v.is_number()) {
            issues.add(wpath, integer_entries ? "expected an integer state index"
                                              : "expected a number");
            continue;
          }
          store(t, x, u, w, v);
        }
      }
    }
  }
}

json must_parse(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
}

void write_weights(JsonWriter& w, const std::vector<double>& weights) {
  w.begin_array();
  for (double v : weights) w.value(v);
  w.end_array();
}

void write_int_list(JsonWriter& w, const std::vector<int>& values) {
  w.begin_array();
  for (int v : values) w.value(v);
  w.end_array();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void write_audit_report(JsonWriter& w, const AuditReport& report) {
  w.kv("status", "OK");
  w.kv("verdict", to_string_verdict(report.verdict));
  w.kv("tolerance", report.tolerance);
  w.key("max_gap");
  if (std::isfinite(report.max_gap))
    w.value(report.max_gap);
  else
    w.value("inf");
  w.key("witnesses").begin_array();
  for (const AuditWitness& witness : report.witnesses) {
    w.begin_object();
    w.kv("stage", witness.stage);
    if (const int* state = std::get_if<int>(&witness.restart)) {
      w.kv("restart_state", *state);
    } else {
      w.key("restart_law");
      write_weights(w, std::get<Law>(witness.restart).weights);
    }
    w.kv("subproblem_feasible", witness.subproblem_value.has_value());
    if (witness.subproblem_value.has_value())
      w.kv("subproblem_value", *witness.subproblem_value);
    w.kv("original_feasible", witness.original_value.has_value());
    if (witness.original_value.has_value()) w.kv("original_value", *witness.original_value);
    w.key("gap");
    if (std::isfinite(witness.gap))
      w.value(witness.gap);
    else
      w.value("inf");
    w.end_object();
  }
  w.end_array();
}

std::string audit_json(ExperimentKind kind, const AuditReport& report) {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.kv("kind", to_string(kind));
  write_audit_report(w, report);
  w.end_object();
  w.finish();
  return os.str();
}

std::string infeasible_audit_json(ExperimentKind kind, const std::string& message) {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.kv("kind", to_string(kind));
  w.kv("status", "INFEASIBLE");
  w.kv("message", message);
  w.end_object();
  w.finish();
  return os.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSolve: return "solve";
    case ExperimentKind::kAuditUnconstrained: return "audit-unconstrained";
    case ExperimentKind::kAuditNaive: return "audit-naive";
    case ExperimentKind::kAuditLaw: return "audit-law";
    case ExperimentKind::kAuditRolling: return "audit-rolling";
    case ExperimentKind::kSweep: return "sweep";
  }
  throw std::logic_error("to_string: unknown experiment kind");
}

ExperimentKind experiment_from_string(const std::string& name) {
  if (name == "solve") return ExperimentKind::kSolve;
  if (name == "audit-unconstrained") return ExperimentKind::kAuditUnconstrained;
  if (name == "audit-naive") return ExperimentKind::kAuditNaive;
  if (name == "audit-law") return ExperimentKind::kAuditLaw;
  if (name == "audit-rolling") return ExperimentKind::kAuditRolling;
  if (name == "sweep") return ExperimentKind::kSweep;
  throw std::invalid_argument(
      "unknown experiment \"" + name +
      "\" (expected solve, audit-unconstrained, audit-naive, audit-law, audit-rolling, sweep)");
}

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
  const json root = must_parse(json_text, origin);
  IssueList issues;
  if (!root.is_object()) {
    issues.add("", "top level must be a JSON object");
    fail(origin, issues);
  }

  long long first_stage = 0;
  get_int_field(root, "first_stage", "", false, 0, first_stage, issues);

  std::vector<int> state_sizes, control_sizes, noise_sizes;
  bool sizes_ok = get_size_list(root, "state_sizes", "", state_sizes, issues);
  sizes_ok &= get_size_list(root, "control_sizes", "", control_sizes, issues);
  sizes_ok &= get_size_list(root, "noise_sizes", "", noise_sizes, issues);
  if (sizes_ok) {
    if (state_sizes.size() != control_sizes.size() + 1) {
      issues.add("state_sizes", "expected one more entry than control_sizes");
      sizes_ok = false;
    }
    if (noise_sizes.size() != control_sizes.size()) {
      issues.add("noise_sizes", "expected the same length as control_sizes");
      sizes_ok = false;
    }
  }
  if (!sizes_ok) fail(origin, issues);  // table shapes are undefined without sizes

  Scenario scenario{std::string{},
                    FiniteSOCProblem(static_cast<int>(first_stage), state_sizes, control_sizes,
                                     noise_sizes),
                    std::nullopt,
                    0,
                    ExperimentKind::kSolve,
                    {},
                    {},
                    0,
                    Caps{},
                    Tolerances{}};
  FiniteSOCProblem& p = scenario.problem;
  const int t0 = p.first_stage();
  const int T = p.last_stage();

  if (const auto it = root.find("name"); it != root.end()) {
    if (it->is_string())
      scenario.name = it->get<std::string>();
    else
      issues.add("name", "expected a string");
  }

  read_stage_table(root, "dynamics", p, true, issues,
                   [&p](int t, int x, int u, int w, const json& v) {
                     p.dynamics(t)(x, u, w) = v.get<int>();
                   });
  read_stage_table(root, "stage_costs", p, false, issues,
                   [&p](int t, int x, int u, int w, const json& v) {
                     p.stage_cost(t)(x, u, w) = v.get<double>();
                   });

  if (const auto it = root.find("noise_laws"); it == root.end()) {
    issues.add("noise_laws", "missing required field");
  } else if (!it->is_array() || static_cast<int>(it->size()) != p.num_stages()) {
    issues.add("noise_laws",
               "expected one law per transition stage (" + std::to_string(p.num_stages()) + ")");
  } else {
    for (int k = 0; k < p.num_stages(); ++k) {
      std::vector<double> law;
      if (get_double_list((*it)[static_cast<std::size_t>(k)],
                          "noise_laws[" + std::to_string(k) + "]",
                          static_cast<std::size_t>(p.noise_size(t0 + k)), law, issues))
        p.noise_law(t0 + k) = std::move(law);
    }
  }

  if (const auto it = root.find("final_cost"); it == root.end()) {
    issues.add("final_cost", "missing required field");
  } else {
    std::vector<double> k_cost;
    if (get_double_list(*it, "final_cost", static_cast<std::size_t>(p.state_size(T)), k_cost,
                        issues))
      p.final_cost() = std::move(k_cost);
  }

  // Structural validation of the assembled problem (dynamics ranges, law
  // normalization) joins the same issue list.
  for (const ValidationIssue& issue : validate(p).issues)
    issues.add("", "stage " + std::to_string(issue.stage) + ": " + issue.message);

  if (const auto it = root.find("constraint"); it != root.end()) {
    if (!it->is_object() || !it->contains("type") || !(*it)["type"].is_string()) {
      issues.add("constraint", "expected an object with a string \"type\"");
    } else {
      const std::string type = (*it)["type"].get<std::string>();
      const std::size_t nT = static_cast<std::size_t>(p.state_size(T));
      if (type == "expectation") {
        ExpectationForm form;
        bool ok = true;
        if (const auto g = it->find("g"); g != it->end())
          ok = get_double_list(*g, "constraint.g", nT, form.g, issues);
        else {
          issues.add("constraint.g", "missing required field");
          ok = false;
        }
        ok &= get_double_field(*it, "level", "constraint.", true, 0.0, form.level, issues);
        if (ok) scenario.constraint = std::move(form);
      } else if (type == "chance") {
        ChanceForm form;
        bool ok = true;
        if (const auto h = it->find("h"); h != it->end())
          ok = get_double_list(*h, "constraint.h", nT, form.h, issues);
        else {
          issues.add("constraint.h", "missing required field");
          ok = false;
        }
        ok &= get_double_field(*it, "threshold", "constraint.", true, 0.0, form.threshold,
                               issues);
        ok &= get_double_field(*it, "probability", "constraint.", true, 0.0, form.probability,
                               issues);
        if (ok && !(form.probability >= 0.0 && form.probability <= 1.0)) {
          issues.add("constraint.probability", "must lie in [0, 1]");
          ok = false;
        }
        if (ok) scenario.constraint = std::move(form);
      } else if (type == "joint_chance") {
        JointChanceForm form;
        bool ok = get_double_field(*it, "probability", "constraint.", true, 0.0,
                                   form.probability, issues);
        if (ok && !(form.probability >= 0.0 && form.probability <= 1.0)) {
          issues.add("constraint.probability", "must lie in [0, 1]");
          ok = false;
        }
        const auto th = it->find("thresholds");
        if (th == it->end() || !th->is_array() ||
            static_cast<int>(th->size()) != p.num_stages()) {
          issues.add("constraint.thresholds", "expected one entry per stage after the first (" +
                                                  std::to_string(p.num_stages()) + ")");
          ok = false;
        } else {
          for (int k = 0; k < p.num_stages(); ++k) {
            const json& entry = (*th)[static_cast<std::size_t>(k)];
            const std::string path = "constraint.thresholds[" + std::to_string(k) + "]";
            StageThreshold threshold;
            if (!entry.is_object()) {
              issues.add(path, "expected an object with \"g\" and \"threshold\"");
              ok = false;
              continue;
            }
            if (const auto g = entry.find("g"); g != entry.end())
              ok &= get_double_list(*g, path + ".g",
                                    static_cast<std::size_t>(p.state_size(t0 + k + 1)),
                                    threshold.g, issues);
            else {
              issues.add(path + ".g", "missing required field");
              ok = false;
            }
            ok &= get_double_field(entry, "threshold", path + ".", true, 0.0, threshold.b,
                                   issues);
            form.thresholds.push_back(std::move(threshold));
          }
        }
        if (ok) scenario.constraint = std::move(form);
      } else {
        issues.add("constraint.type",
                   "unknown type \"" + type + "\" (expected expectation, chance, joint_chance)");
      }
    }
  }

  if (const auto it = root.find("initial"); it == root.end()) {
    issues.add("initial", "missing required field");
  } else if (!it->is_object()) {
    issues.add("initial", "expected an object with \"state\" or \"law\"");
  } else if (const auto st = it->find("state"); st != it->end()) {
    if (!st->is_number_integer()) {
      issues.add("initial.state", "expected an integer state index");
    } else {
      const int x0 = st->get<int>();
      if (x0 < 0 || x0 >= p.state_size(t0))
        issues.add("initial.state", "state index " + std::to_string(x0) +
                                        " outside the first-stage state space of size " +
                                        std::to_string(p.state_size(t0)));
      else
        scenario.initial = x0;
    }
  } else if (const auto lw = it->find("law"); lw != it->end()) {
    std::vector<double> weights;
    if (get_double_list(*lw, "initial.law", static_cast<std::size_t>(p.state_size(t0)), weights,
                        issues)) {
      Law mu;
      mu.stage = t0;
      mu.weights = std::move(weights);
      if (!is_law(mu, kLawNormalizationTol)) {
        double sum = 0.0;
        for (double v : mu.weights) sum += v;
        issues.add("initial.law", "not a probability vector (sums to " + format_double(sum) +
                                      " or has a negative entry)");
      } else {
        scenario.initial = std::move(mu);
      }
    }
  } else {
    issues.add("initial", "expected an object with \"state\" or \"law\"");
  }

  if (const auto it = root.find("experiment"); it != root.end()) {
    if (!it->is_string()) {
      issues.add("experiment", "expected a string");
    } else {
      try {
        scenario.experiment = experiment_from_string(it->get<std::string>());
      } catch (const std::invalid_argument& e) {
        issues.add("experiment", e.what());
      }
    }
  }

  if (const auto it = root.find("sweep_levels"); it != root.end()) {
    if (!it->is_array()) {
      issues.add("sweep_levels", "expected an array of numbers");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        if (!(*it)[i].is_number()) {
          issues.add("sweep_levels[" + std::to_string(i) + "]", "expected a number");
          continue;
        }
        scenario.sweep_levels.push_back((*it)[i].get<double>());
      }
    }
  }

  if (const auto it = root.find("rolling_overrides"); it != root.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != p.num_stages()) {
      issues.add("rolling_overrides", "expected one entry (integer or null) per arrival stage (" +
                                          std::to_string(p.num_stages()) + ")");
    } else {
      for (int k = 0; k < p.num_stages(); ++k) {
        const json& e = (*it)[static_cast<std::size_t>(k)];
        const std::string path = "rolling_overrides[" + std::to_string(k) + "]";
        if (e.is_null()) {
          scenario.rolling_overrides.emplace_back(std::nullopt);
        } else if (!e.is_number_integer()) {
          issues.add(path, "expected an integer state index or null");
          scenario.rolling_overrides.emplace_back(std::nullopt);
        } else {
          const int forced = e.get<int>();
          if (forced < 0 || forced >= p.state_size(t0 + k + 1)) {
            issues.add(path, "state index " + std::to_string(forced) +
                                 " outside the stage-" + std::to_string(t0 + k + 1) +
                                 " state space of size " +
                                 std::to_string(p.state_size(t0 + k + 1)));
            scenario.rolling_overrides.emplace_back(std::nullopt);
          } else {
            scenario.rolling_overrides.emplace_back(forced);
          }
        }
      }
    }
  }

  long long seed = 0;
  if (get_int_field(root, "seed", "", false, 0, seed, issues) && seed >= 0)
    scenario.seed = static_cast<std::uint64_t>(seed);
  else if (seed < 0)
    issues.add("seed", "expected a nonnegative integer");

  if (const auto it = root.find("caps"); it != root.end()) {
    if (!it->is_object()) {
      issues.add("caps", "expected an object");
    } else {
      long long v = 0;
      if (get_int_field(*it, "policies", "caps.", false,
                        static_cast<long long>(kDefaultPolicyCap), v, issues) &&
          v > 0)
        scenario.caps.policies = static_cast<std::uint64_t>(v);
      else if (v <= 0)
        issues.add("caps.policies", "expected a positive integer");
      if (get_int_field(*it, "laws", "caps.", false, static_cast<long long>(kDefaultLawCap), v,
                        issues) &&
          v > 0)
        scenario.caps.laws = static_cast<std::uint64_t>(v);
      else if (v <= 0)
        issues.add("caps.laws", "expected a positive integer");
    }
  }

  if (const auto it = root.find("tolerances"); it != root.end()) {
    if (!it->is_object()) {
      issues.add("tolerances", "expected an object");
    } else {
      get_double_field(*it, "gap", "tolerances.", false, scenario.tolerances.gap,
                       scenario.tolerances.gap, issues);
      get_double_field(*it, "feasibility", "tolerances.", false,
                       scenario.tolerances.feasibility, scenario.tolerances.feasibility, issues);
      get_double_field(*it, "law_quantum", "tolerances.", false,
                       scenario.tolerances.law_quantum, scenario.tolerances.law_quantum, issues);
      if (scenario.tolerances.gap < 0.0) issues.add("tolerances.gap", "must be nonnegative");
      if (scenario.tolerances.feasibility < 0.0)
        issues.add("tolerances.feasibility", "must be nonnegative");
      if (scenario.tolerances.law_quantum <= 0.0)
        issues.add("tolerances.law_quantum", "must be positive");
    }
  }

  // Cross-field requirements of the selected experiment.
  switch (scenario.experiment) {
    case ExperimentKind::kAuditNaive:
    case ExperimentKind::kAuditLaw:
      if (!scenario.constraint.has_value())
        issues.add("experiment", to_string(scenario.experiment) + " needs a constraint block");
      break;
    case ExperimentKind::kSweep:
      if (!scenario.constraint.has_value())
        issues.add("experiment", "sweep needs a constraint block");
      if (scenario.sweep_levels.empty())
        issues.add("sweep_levels", "sweep needs at least one level");
      break;
    case ExperimentKind::kAuditRolling:
      if (!p.is_deterministic())
        issues.add("experiment",
                   "audit-rolling needs a noise-free problem (every noise space a singleton)");
      if (!std::holds_alternative<int>(scenario.initial))
        issues.add("initial", "audit-rolling needs a Dirac initial state");
      break;
    case ExperimentKind::kSolve:
    case ExperimentKind::kAuditUnconstrained:
      break;
  }

  if (!issues.empty()) fail(origin, issues);
  return scenario;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open scenario file " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_scenario(buffer.str(), path);
}

std::string scenario_to_json(const Scenario& scenario) {
  const FiniteSOCProblem& p = scenario.problem;
  const int t0 = p.first_stage();
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  if (!scenario.name.empty()) w.kv("name", scenario.name);
  w.kv("first_stage", t0);
  w.key("state_sizes").begin_array();
  for (int t = t0; t <= p.last_stage(); ++t) w.value(p.state_size(t));
  w.end_array();
  w.key("control_sizes").begin_array();
  for (int t = t0; t < p.last_stage(); ++t) w.value(p.control_size(t));
  w.end_array();
  w.key("noise_sizes").begin_array();
  for (int t = t0; t < p.last_stage(); ++t) w.value(p.noise_size(t));
  w.end_array();

  w.key("dynamics").begin_array();
  for (int t = t0; t < p.last_stage(); ++t) {
    w.begin_array();
    for (int x = 0; x < p.state_size(t); ++x) {
      w.begin_array();
      for (int u = 0; u < p.control_size(t); ++u) {
        w.begin_array();
        for (int n = 0; n < p.noise_size(t); ++n) w.value(p.dynamics(t)(x, u, n));
        w.end_array();
      }
      w.end_array();
    }
    w.end_array();
  }
  w.end_array();

  w.key("stage_costs").begin_array();
  for (int t = t0; t < p.last_stage(); ++t) {
    w.begin_array();
    for (int x = 0; x < p.state_size(t); ++x) {
      w.begin_array();
      for (int u = 0; u < p.control_size(t); ++u) {
        w.begin_array();
        for (int n = 0; n < p.noise_size(t); ++n) w.value(p.stage_cost(t)(x, u, n));
        w.end_array();
      }
      w.end_array();
    }
    w.end_array();
  }
  w.end_array();

  w.key("noise_laws").begin_array();
  for (int t = t0; t < p.last_stage(); ++t) write_weights(w, p.noise_law(t));
  w.end_array();
  w.key("final_cost");
  write_weights(w, p.final_cost());

  if (scenario.constraint.has_value()) {
    w.key("constraint").begin_object();
    if (const ExpectationForm* form = std::get_if<ExpectationForm>(&*scenario.constraint)) {
      w.kv("type", "expectation");
      w.key("g");
      write_weights(w, form->g);
      w.kv("level", form->level);
    } else if (const ChanceForm* chance = std::get_if<ChanceForm>(&*scenario.constraint)) {
      w.kv("type", "chance");
      w.key("h");
      write_weights(w, chance->h);
      w.kv("threshold", chance->threshold);
      w.kv("probability", chance->probability);
    } else {
      const JointChanceForm& joint = std::get<JointChanceForm>(*scenario.constraint);
      w.kv("type", "joint_chance");
      w.key("thresholds").begin_array();
      for (const StageThreshold& threshold : joint.thresholds) {
        w.begin_object();
        w.key("g");
        write_weights(w, threshold.g);
        w.kv("threshold", threshold.b);
        w.end_object();
      }
      w.end_array();
      w.kv("probability", joint.probability);
    }
    w.end_object();
  }

  w.key("initial").begin_object();
  if (const int* state = std::get_if<int>(&scenario.initial)) {
    w.kv("state", *state);
  } else {
    w.key("law");
    write_weights(w, std::get<Law>(scenario.initial).weights);
  }
  w.end_object();

  w.kv("experiment", to_string(scenario.experiment));
  if (!scenario.sweep_levels.empty()) {
    w.key("sweep_levels");
    write_weights(w, scenario.sweep_levels);
  }
  if (!scenario.rolling_overrides.empty()) {
    w.key("rolling_overrides").begin_array();
    for (const std::optional<int>& forced : scenario.rolling_overrides) {
      if (forced.has_value())
        w.value(*forced);
      else
        w.null();
    }
    w.end_array();
  }
  w.kv("seed", scenario.seed);
  w.key("caps").begin_object();
  w.kv("policies", scenario.caps.policies);
  w.kv("laws", scenario.caps.laws);
  w.end_object();
  w.key("tolerances").begin_object();
  w.kv("gap", scenario.tolerances.gap);
  w.kv("feasibility", scenario.tolerances.feasibility);
  w.kv("law_quantum", scenario.tolerances.law_quantum);
  w.end_object();
  w.end_object();
  w.finish();
  return os.str();
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  write_file(path, scenario_to_json(scenario));
}

Law initial_law(const Scenario& scenario) {
  const FiniteSOCProblem& p = scenario.problem;
  if (const int* state = std::get_if<int>(&scenario.initial))
    return dirac_law(p.first_stage(), p.state_size(p.first_stage()), *state);
  return std::get<Law>(scenario.initial);
}

ConstrainedProblem build_constrained(const Scenario& scenario) {
  if (!scenario.constraint.has_value())
    throw std::invalid_argument("scenario has no constraint block");
  if (const ExpectationForm* form = std::get_if<ExpectationForm>(&*scenario.constraint))
    return ConstrainedProblem{scenario.problem, ExpectationConstraint{form->g, form->level}};
  if (const ChanceForm* chance = std::get_if<ChanceForm>(&*scenario.constraint))
    return ConstrainedProblem{
        scenario.problem,
        make_chance_constraint(chance->h, chance->threshold, chance->probability)};
  const JointChanceForm& joint = std::get<JointChanceForm>(*scenario.constraint);
  return augment_joint_chance(scenario.problem, joint.thresholds, joint.probability);
}

ConstrainedProblem build_constrained_at_level(const Scenario& scenario, double level) {
  if (!scenario.constraint.has_value())
    throw std::invalid_argument("scenario has no constraint block");
  Scenario adjusted = scenario;
  if (ExpectationForm* form = std::get_if<ExpectationForm>(&*adjusted.constraint))
    form->level = level;
  else if (ChanceForm* chance = std::get_if<ChanceForm>(&*adjusted.constraint))
    chance->probability = level;
  else
    std::get<JointChanceForm>(*adjusted.constraint).probability = level;
  return build_constrained(adjusted);
}

LawDpOptions law_options(const Scenario& scenario) {
  LawDpOptions opts;
  opts.law_cap = scenario.caps.laws;
  opts.law_quantum = scenario.tolerances.law_quantum;
  opts.feasibility_tol = scenario.tolerances.feasibility;
  return opts;
}

namespace {

std::string unconstrained_solution_json(const FiniteSOCProblem& p, const DpSolution& sol,
                                        const Law& mu0) {
  double value_at_initial = 0.0;
  for (int x = 0; x < p.state_size(p.first_stage()); ++x)
    value_at_initial +=
        mu0.weights[static_cast<std::size_t>(x)] * sol.value.at(p.first_stage(), x);

  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.kv("kind", "unconstrained");
  w.kv("status", "OPTIMAL");
  w.kv("first_stage", p.first_stage());
  w.kv("value_at_initial", value_at_initial);
  w.key("value").begin_array();
  for (const std::vector<double>& layer : sol.value.value) write_weights(w, layer);
  w.end_array();
  w.key("policy").begin_array();
  for (const std::vector<int>& layer : sol.policy.feedback) write_int_list(w, layer);
  w.end_array();
  w.end_object();
  w.finish();
  return os.str();
}

std::string constrained_solution_json(const ConstrainedProblem& cp,
                                      const ConstrainedSolution& sol, const Law& mu0) {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.kv("kind", "constrained");
  w.kv("status", sol.feasible() ? "OPTIMAL" : "INFEASIBLE");
  w.kv("first_stage", sol.graph.first_stage);
  w.key("reachable_law_counts").begin_array();
  for (const std::vector<Law>& layer : sol.graph.laws)
    w.value(static_cast<std::uint64_t>(layer.size()));
  w.end_array();
  if (sol.feasible()) {
    w.kv("value", *sol.value);
    const InducedPlan plan = induced_plan(sol, mu0);
    w.key("plan").begin_array();
    for (const PlanStep& step : plan.steps) {
      w.begin_object();
      w.kv("stage", step.law.stage);
      w.key("law");
      write_weights(w, step.law.weights);
      w.key("feedback");
      write_int_list(w, step.feedback);
      w.end_object();
    }
    w.end_array();
    w.key("final_law");
    write_weights(w, plan.final_law.weights);
    double load = 0.0;
    for (std::size_t x = 0; x < plan.final_law.weights.size(); ++x)
      load += cp.constraint.g[x] * plan.final_law.weights[x];
    w.kv("constraint_load", load);
    w.kv("constraint_level", cp.constraint.level);
  }
  w.end_object();
  w.finish();
  return os.str();
}

}  // namespace

int run_scenario(const Scenario& scenario, const std::string& out_dir,
                 std::string& diagnostics) {
  namespace fs = std::filesystem;
  const fs::path out(out_dir);
  try {
    fs::create_directories(out);
    const Law mu0 = initial_law(scenario);
    const LawDpOptions opts = law_options(scenario);
    const double tol = scenario.tolerances.gap;

    switch (scenario.experiment) {
      case ExperimentKind::kSolve: {
        if (!scenario.constraint.has_value()) {
          const DpSolution sol = solve_dp(scenario.problem);
          write_file(out / "solution.json",
                     unconstrained_solution_json(scenario.problem, sol, mu0));
          return 0;
        }
        const ConstrainedProblem cp = build_constrained(scenario);
        const ConstrainedSolution sol = solve_constrained(cp, mu0, opts);
        write_file(out / "solution.json", constrained_solution_json(cp, sol, mu0));
        if (!sol.feasible()) {
          diagnostics = "constrained problem is infeasible at level " +
                        format_double(cp.constraint.level);
          return 2;
        }
        return 0;
      }

      case ExperimentKind::kAuditUnconstrained: {
        const AuditReport report = audit_unconstrained(scenario.problem, mu0, tol);
        write_file(out / "audit.json", audit_json(scenario.experiment, report));
        return 0;
      }

      case ExperimentKind::kAuditNaive:
      case ExperimentKind::kAuditLaw: {
        const ConstrainedProblem cp = build_constrained(scenario);
        try {
          const AuditReport report =
              scenario.experiment == ExperimentKind::kAuditNaive
                  ? audit_constrained_naive(cp, mu0, opts, tol)
                  : audit_constrained_law(cp, mu0, opts, tol);
          write_file(out / "audit.json", audit_json(scenario.experiment, report));
          return 0;
        } catch (const InfeasibleError& e) {
          write_file(out / "audit.json", infeasible_audit_json(scenario.experiment, e.what()));
          diagnostics = e.what();
          return 2;
        }
      }

      case ExperimentKind::kAuditRolling: {
        const int x0 = std::get<int>(scenario.initial);
        std::vector<std::optional<int>> overrides = scenario.rolling_overrides;
        if (overrides.empty())
          overrides.assign(static_cast<std::size_t>(scenario.problem.num_stages()),
                           std::nullopt);
        const AuditReport report =
            audit_deterministic_rolling(scenario.problem, x0, overrides, tol);
        write_file(out / "audit.json", audit_json(scenario.experiment, report));
        return 0;
      }

      case ExperimentKind::kSweep: {
        if (scenario.sweep_levels.empty()) {
          diagnostics = "sweep needs at least one level in sweep_levels";
          return 1;
        }
        std::ostringstream csv;
        csv << "level,value,naive_verdict,law_verdict\n";
        for (const double level : scenario.sweep_levels) {
          const ConstrainedProblem cp = build_constrained_at_level(scenario, level);
          const ConstrainedSolution sol = solve_constrained(cp, mu0, opts);
          csv << format_double(level) << ',';
          if (!sol.feasible()) {
            csv << "INFEASIBLE,NA,NA\n";
            continue;
          }
          const AuditReport naive = audit_constrained_naive(cp, mu0, opts, tol);
          const AuditReport law = audit_constrained_law(cp, mu0, opts, tol);
          csv << format_double(*sol.value) << ',' << to_string_verdict(naive.verdict) << ','
              << to_string_verdict(law.verdict) << '\n';
        }
        write_file(out / "sweep.csv", csv.str());
        return 0;
      }
    }
    diagnostics = "unknown experiment kind";
    return 1;
  } catch (const CapExceededError& e) {
    diagnostics = std::string("cap exceeded: ") + e.what();
    return 1;
  } catch (const std::exception& e) {
    diagnostics = e.what();
    return 1;
  }
}

}  // namespace socdp
