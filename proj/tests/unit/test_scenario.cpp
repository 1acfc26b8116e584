#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "socdp/dp.hpp"
#include "socdp/json_writer.hpp"
#include "socdp/law.hpp"
#include "socdp/scenario.hpp"

using namespace socdp;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
  return std::string(SOCDP_FIXTURE_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// fresh scratch directory per call
std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("socdp-test-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json run_to_json(const Scenario& scenario, const std::string& tag, const std::string& artifact,
                 int expected_code = 0) {
  const auto dir = scratch_dir(tag);
  std::string diagnostics;
  const int code = run_scenario(scenario, dir.string(), diagnostics);
  CAPTURE(diagnostics);
  REQUIRE(code == expected_code);
  return json::parse(read_file((dir / artifact).string()));
}

}  // namespace

TEST_CASE("experiment names round trip") {
  for (const char* name : {"solve", "audit-unconstrained", "audit-naive", "audit-law",
                           "audit-rolling", "sweep"})
    CHECK(to_string(experiment_from_string(name)) == name);
  CHECK_THROWS_AS(experiment_from_string("optimize"), std::invalid_argument);
}

TEST_CASE("a minimal scenario loads, solves, and reports its optimum") {
  const Scenario s = load_scenario(fixture("minimal.json"));
  CHECK(s.name == "minimal-two-state");
  CHECK(s.experiment == ExperimentKind::kSolve);
  CHECK_FALSE(s.constraint.has_value());
  CHECK(s.problem.num_stages() == 1);

  const json out = run_to_json(s, "minimal", "solution.json");
  CHECK(out["kind"] == "unconstrained");
  CHECK(out["status"] == "OPTIMAL");

  const DpSolution sol = solve_dp(s.problem);
  CHECK(out["value_at_initial"].get<double>() == sol.value.at(0, 0));
  CHECK(out["value_at_initial"].get<double>() == 1.0);
  CHECK(out["value"][0][0].get<double>() == 1.0);
  CHECK(out["value"][0][1].get<double>() == 1.5);
  CHECK(out["policy"][0][0].get<int>() == 0);
}

TEST_CASE("scenario serialization is idempotent on every fixture") {
  for (const char* name :
       {"minimal.json", "chance.json", "sweep.json", "rolling.json", "witness.json"}) {
    CAPTURE(name);
    const Scenario first = load_scenario(fixture(name));
    const std::string once = scenario_to_json(first);
    const Scenario second = parse_scenario(once, "<memory>");
    const std::string twice = scenario_to_json(second);
    CHECK(once == twice);
  }

  // generated fixtures are already in canonical form, byte for byte
  for (const char* name : {"rolling.json", "witness.json"}) {
    CAPTURE(name);
    CHECK(read_file(fixture(name)) == scenario_to_json(load_scenario(fixture(name))));
  }
}

TEST_CASE("saving and reloading preserves the scenario") {
  const Scenario s = load_scenario(fixture("chance.json"));
  const auto dir = scratch_dir("roundtrip");
  const std::string path = (dir / "copy.json").string();
  save_scenario(s, path);
  CHECK(scenario_to_json(load_scenario(path)) == scenario_to_json(s));
}

TEST_CASE("diagnostics name the offending field") {
  // every entry pairs a mutilation of a valid scenario with the substring
  // the error must carry
  const std::string valid = read_file(fixture("minimal.json"));

  struct Case {
    const char* label;
    std::string text;
    const char* needle;
  };
  auto edit = [&](const std::string& from, const std::string& to) {
    std::string text = valid;
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
  };

  const Case cases[] = {
      {"broken noise law", "", "stage 1: noise law sums to 0.9"},  // via fixture below
      {"missing dynamics", edit("\"dynamics\"", "\"dyn\""), "dynamics"},
      {"ragged dynamics row", edit("[[0], [1]],\n      [[1], [0]]", "[[0], [1]]"), "dynamics[0]"},
      {"unknown experiment", edit("\"solve\"", "\"optimize\""), "experiment"},
      {"missing initial", edit("\"initial\": {\"state\": 0},", ""), "initial"},
      {"initial state out of range", edit("{\"state\": 0}", "{\"state\": 9}"), "initial"},
      {"negative seed", edit("\"experiment\": \"solve\"", "\"experiment\": \"solve\", \"seed\": -4"),
       "seed"},
  };
  for (const Case& c : cases) {
    if (std::string(c.label) == "broken noise law") continue;
    CAPTURE(c.label);
    CHECK_THROWS_WITH_AS(parse_scenario(c.text, "<memory>"), doctest::Contains(c.needle),
                         std::runtime_error);
  }

  // the fixture with the broken law names the stage and the bad sum
  CHECK_THROWS_WITH_AS(load_scenario(fixture("bad_law.json")),
                       doctest::Contains("stage 1: noise law sums to 0.9"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_scenario(fixture("bad_law.json")),
                       doctest::Contains("bad_law.json"), std::runtime_error);

  // malformed JSON still identifies its origin
  CHECK_THROWS_WITH_AS(parse_scenario("{", "<memory>"), doctest::Contains("<memory>"),
                       std::runtime_error);
}

TEST_CASE("experiments reject scenarios missing their ingredients") {
  Scenario naive = load_scenario(fixture("minimal.json"));
  const std::string base_text = scenario_to_json(naive);

  auto with = [&](const std::string& from, const std::string& to) {
    std::string text = base_text;
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
  };

  // audit-naive without a constraint block
  CHECK_THROWS_WITH_AS(
      parse_scenario(with("\"experiment\": \"solve\"", "\"experiment\": \"audit-naive\""),
                     "<memory>"),
      doctest::Contains("constraint"), std::runtime_error);

  // sweep without levels
  CHECK_THROWS_WITH_AS(
      parse_scenario(with("\"experiment\": \"solve\"", "\"experiment\": \"sweep\""), "<memory>"),
      doctest::Contains("sweep_levels"), std::runtime_error);

  // rolling audit on a stochastic problem
  const Scenario chance = load_scenario(fixture("chance.json"));
  const std::string chance_text = scenario_to_json(chance);
  std::string rolling_text = chance_text;
  const auto at = rolling_text.find("\"experiment\": \"solve\"");
  REQUIRE(at != std::string::npos);
  rolling_text.replace(at, std::string("\"experiment\": \"solve\"").size(),
                       "\"experiment\": \"audit-rolling\"");
  CHECK_THROWS_WITH_AS(parse_scenario(rolling_text, "<memory>"),
                       doctest::Contains("noise-free"), std::runtime_error);
}

TEST_CASE("constrained solves write the plan and its load") {
  const Scenario s = load_scenario(fixture("chance.json"));
  const json out = run_to_json(s, "chance", "solution.json");
  CHECK(out["kind"] == "constrained");
  CHECK(out["status"] == "OPTIMAL");
  CHECK(out["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out["constraint_level"].get<double>() == 0.25);
  CHECK(out["constraint_load"].get<double>() <= 0.25 + 1e-9);
  CHECK(out["plan"].size() == 2);
  CHECK(out["plan"][0]["stage"] == 0);
  CHECK(out["final_law"].size() == 3);

  // the risky shortcut is taken but fenced off at the second stage
  CHECK(out["plan"][0]["feedback"][0].get<int>() == 0);
  CHECK(out["plan"][1]["feedback"][2].get<int>() == 1);
}

TEST_CASE("infeasible scenarios exit with the dedicated code") {
  const Scenario s = load_scenario(fixture("infeasible.json"));
  const auto dir = scratch_dir("infeasible");
  std::string diagnostics;
  CHECK(run_scenario(s, dir.string(), diagnostics) == 2);
  const json out = json::parse(read_file((dir / "solution.json").string()));
  CHECK(out["status"] == "INFEASIBLE");
  CHECK_FALSE(out.contains("value"));

  Scenario audit = s;
  audit.experiment = ExperimentKind::kAuditNaive;
  const json report = run_to_json(audit, "infeasible-audit", "audit.json", 2);
  CHECK(report["status"] == "INFEASIBLE");
  CHECK_FALSE(report.contains("verdict"));
  CHECK(report["message"].get<std::string>().find("infeasible") != std::string::npos);
}

TEST_CASE("artifacts are byte-for-byte reproducible") {
  const Scenario solve = load_scenario(fixture("chance.json"));
  const auto a = scratch_dir("repro-a");
  const auto b = scratch_dir("repro-b");
  std::string diagnostics;
  REQUIRE(run_scenario(solve, a.string(), diagnostics) == 0);
  REQUIRE(run_scenario(solve, b.string(), diagnostics) == 0);
  CHECK(read_file((a / "solution.json").string()) == read_file((b / "solution.json").string()));

  const Scenario audit = load_scenario(fixture("witness.json"));
  const auto c = scratch_dir("repro-c");
  const auto d = scratch_dir("repro-d");
  REQUIRE(run_scenario(audit, c.string(), diagnostics) == 0);
  REQUIRE(run_scenario(audit, d.string(), diagnostics) == 0);
  CHECK(read_file((c / "audit.json").string()) == read_file((d / "audit.json").string()));
}

TEST_CASE("the frozen witness scenario replays its paired verdicts") {
  Scenario s = load_scenario(fixture("witness.json"));
  REQUIRE(s.experiment == ExperimentKind::kAuditNaive);

  const json naive = run_to_json(s, "witness-naive", "audit.json");
  CHECK(naive["kind"] == "audit-naive");
  CHECK(naive["verdict"] == "INCONSISTENT");

  s.experiment = ExperimentKind::kAuditLaw;
  const json law = run_to_json(s, "witness-law", "audit.json");
  CHECK(law["verdict"] == "CONSISTENT");
  CHECK(law["max_gap"].get<double>() < 1e-9);

  // the naive report carries at least one witness whose gap exceeds the
  // sweep of numerical noise by six orders of magnitude
  bool strong = false;
  for (const json& w : naive["witnesses"]) {
    if (w["gap"].is_number() && w["gap"].get<double>() > 1e-6) strong = true;
    if (w["gap"].is_string()) {
      CHECK(w["gap"] == "inf");
      CHECK(w["original_feasible"] == false);
    }
  }
  CHECK(strong);
}

TEST_CASE("rolling scenarios audit through the artifact pipeline") {
  const Scenario s = load_scenario(fixture("rolling.json"));
  REQUIRE(s.experiment == ExperimentKind::kAuditRolling);
  const json out = run_to_json(s, "rolling", "audit.json");
  CHECK(out["kind"] == "audit-rolling");
  CHECK(out["verdict"] == "CONSISTENT");
  CHECK(out["max_gap"].get<double>() == 0.0);
}

TEST_CASE("sweeps emit one monotone row per level") {
  const Scenario s = load_scenario(fixture("sweep.json"));
  REQUIRE(s.experiment == ExperimentKind::kSweep);
  const auto dir = scratch_dir("sweep");
  std::string diagnostics;
  REQUIRE(run_scenario(s, dir.string(), diagnostics) == 0);

  std::ifstream csv((dir / "sweep.csv").string());
  REQUIRE(csv.good());
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "level,value,naive_verdict,law_verdict");

  int rows = 0;
  double previous = 0.0;
  bool seen_feasible = false;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string level, value, naive, law;
    REQUIRE(std::getline(fields, level, ','));
    REQUIRE(std::getline(fields, value, ','));
    REQUIRE(std::getline(fields, naive, ','));
    REQUIRE(std::getline(fields, law, ','));
    if (value == "INFEASIBLE") {
      CHECK(naive == "NA");
      CHECK(law == "NA");
      CHECK_FALSE(seen_feasible);  // raising the level cannot lose feasibility
      continue;
    }
    const double v = std::strtod(value.c_str(), nullptr);
    if (seen_feasible) CHECK(v <= previous + 1e-12);
    previous = v;
    seen_feasible = true;
    CHECK((naive == "CONSISTENT" || naive == "INCONSISTENT"));
    CHECK((law == "CONSISTENT" || law == "INCONSISTENT"));
  }
  CHECK(rows == static_cast<int>(s.sweep_levels.size()));
  CHECK(seen_feasible);

  // at a level no terminal law can exceed, the constraint prices at zero
  const DpSolution dp = solve_dp(s.problem);
  const Law start = initial_law(s);
  double unconstrained = 0.0;
  for (int x = 0; x < start.size(); ++x)
    unconstrained +=
        start.weights[static_cast<std::size_t>(x)] * dp.value.at(s.problem.first_stage(), x);
  CHECK(std::abs(previous - unconstrained) < 1e-9);  // last row is the vacuous level 1.0
}

TEST_CASE("doubles print with seventeen significant digits and round trip") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");

  const double values[] = {0.1,    1e300,   5e-324, 0.30000000000000004,
                           -2.5e7, 1.0/7.0, 0.0,    123456789.123456789};
  for (double v : values) {
    const std::string text = format_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }

  std::ostringstream os;
  JsonWriter w(os);
  CHECK_THROWS_AS(w.value(std::numeric_limits<double>::infinity()), std::invalid_argument);
  CHECK_THROWS_AS(w.value(std::nan("")), std::invalid_argument);
}

TEST_CASE("the json writer emits deterministic layout") {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.kv("alpha", 1);
  w.key("list").begin_array().value(0.5).value(true).null().end_array();
  w.key("nested").begin_object().kv("s", "a\"b\\c\n").end_object();
  w.end_object();
  w.finish();
  CHECK(os.str() ==
        "{\n"
        "  \"alpha\": 1,\n"
        "  \"list\": [\n"
        "    0.5,\n"
        "    true,\n"
        "    null\n"
        "  ],\n"
        "  \"nested\": {\n"
        "    \"s\": \"a\\\"b\\\\c\\n\"\n"
        "  }\n"
        "}\n");
}
