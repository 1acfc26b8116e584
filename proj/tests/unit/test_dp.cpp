#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "socdp/dp.hpp"
#include "socdp/errors.hpp"
#include "socdp/generators.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"
#include "socdp/rng.hpp"

using namespace socdp;

namespace {

// problems small enough for exhaustive policy enumeration
RandomProblemSpec small_spec() {
  RandomProblemSpec spec;
  spec.max_states = 3;
  spec.max_controls = 2;
  spec.max_noises = 2;
  spec.max_stages = 3;
  return spec;
}

}  // namespace

TEST_CASE("backward induction matches exhaustive policy search") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const FiniteSOCProblem p = random_problem(rng, small_spec());
    const DpSolution sol = solve_dp(p);
    const std::vector<double> brute = oracles::brute_force_values(p);
    const int t0 = p.first_stage();
    for (int x = 0; x < p.state_size(t0); ++x) {
      CAPTURE(seed);
      CAPTURE(x);
      CHECK(std::abs(sol.value.at(t0, x) - brute[static_cast<std::size_t>(x)]) < 1e-9);
    }
  }
}

TEST_CASE("value tables satisfy the one-step optimality inequality") {
  Rng rng(99);
  const FiniteSOCProblem p = random_problem(rng);
  const DpSolution sol = solve_dp(p);
  for (int t = p.first_stage(); t < p.last_stage(); ++t) {
    for (int x = 0; x < p.state_size(t); ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (int u = 0; u < p.control_size(t); ++u) {
        double q = 0.0;
        for (int w = 0; w < p.noise_size(t); ++w) {
          q += p.noise_law(t)[static_cast<std::size_t>(w)] *
               (p.stage_cost(t)(x, u, w) + sol.value.at(t + 1, p.dynamics(t)(x, u, w)));
        }
        CHECK(q >= sol.value.at(t, x) - 1e-12);
        if (q < best) best = q;
      }
      CHECK(sol.value.at(t, x) == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("near-ties resolve to the smallest control index") {
  // one transition, one state, three controls, no noise
  FiniteSOCProblem p(0, {1, 1}, {3}, {1});

  SUBCASE("exact tie between the last two controls") {
    p.stage_cost(0)(0, 0, 0) = 2.0;
    p.stage_cost(0)(0, 1, 0) = 1.0;
    p.stage_cost(0)(0, 2, 0) = 1.0;
    const DpSolution sol = solve_dp(p);
    CHECK(sol.policy.at(0)[0] == 1);
    CHECK(sol.value.at(0, 0) == 1.0);
  }

  SUBCASE("difference below the tie tolerance counts as a tie") {
    p.stage_cost(0)(0, 0, 0) = 1.0 + 5e-13;
    p.stage_cost(0)(0, 1, 0) = 1.0;
    p.stage_cost(0)(0, 2, 0) = 3.0;
    const DpSolution sol = solve_dp(p);
    // control 0 is within kTieTolerance of the minimum, so it wins the tie,
    // but the stored value is the true group minimum
    CHECK(sol.policy.at(0)[0] == 0);
    CHECK(sol.value.at(0, 0) == 1.0);
  }

  SUBCASE("difference above the tolerance is a strict win") {
    p.stage_cost(0)(0, 0, 0) = 1.0 + 1e-9;
    p.stage_cost(0)(0, 1, 0) = 1.0;
    p.stage_cost(0)(0, 2, 0) = 3.0;
    const DpSolution sol = solve_dp(p);
    CHECK(sol.policy.at(0)[0] == 1);
  }
}

TEST_CASE("the returned policy attains the value table") {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    Rng rng(seed);
    const FiniteSOCProblem p = random_problem(rng);
    const DpSolution sol = solve_dp(p);
    const int t0 = p.first_stage();
    for (int x = 0; x < p.state_size(t0); ++x) {
      const double replay = evaluate_policy_exact(p, sol.policy, dirac_law(t0, p.state_size(t0), x));
      CHECK(std::abs(replay - sol.value.at(t0, x)) < 1e-11);
    }
    // no policy can beat it
    const Policy other = random_policy(rng, p);
    const Law mu = random_law(rng, t0, p.state_size(t0));
    double expected_value = 0.0;
    for (int x = 0; x < p.state_size(t0); ++x)
      expected_value += mu.weights[static_cast<std::size_t>(x)] * sol.value.at(t0, x);
    CHECK(evaluate_policy_exact(p, other, mu) >= expected_value - 1e-11);
  }
}

TEST_CASE("policy enumeration visits the whole product space exactly once") {
  FiniteSOCProblem p(0, {2, 2, 2}, {2, 3}, {1, 1});
  CHECK(count_policies(p) == 36);  // 2^2 * 3^2

  PolicyEnumeration en(p);
  CHECK(en.size() == 36);
  std::set<std::string> seen;
  int produced = 0;
  while (auto pol = en.next()) {
    ++produced;
    std::string key;
    for (const auto& stage : pol->feedback)
      for (int u : stage) key += static_cast<char>('0' + u);
    seen.insert(key);
    for (int t = 0; t < 2; ++t)
      for (int x = 0; x < 2; ++x) {
        CHECK(pol->at(t)[static_cast<std::size_t>(x)] >= 0);
        CHECK(pol->at(t)[static_cast<std::size_t>(x)] < p.control_size(t));
      }
  }
  CHECK(produced == 36);
  CHECK(seen.size() == 36);

  // the first policy out is all zeros
  PolicyEnumeration again(p);
  const Policy first = *again.next();
  for (const auto& stage : first.feedback)
    for (int u : stage) CHECK(u == 0);
}

TEST_CASE("enumeration refuses budgets it cannot honor") {
  FiniteSOCProblem p(0, {2, 2, 2}, {2, 3}, {1, 1});
  try {
    PolicyEnumeration en(p, 35);
    FAIL("expected CapExceededError");
  } catch (const CapExceededError& e) {
    CHECK(e.count() == 36);
    CHECK(e.cap() == 35);
  }
  CHECK_NOTHROW(PolicyEnumeration(p, 36));
}

TEST_CASE("policy counting saturates instead of overflowing") {
  // 2^64 policies: a single transition with 64 states and 2 controls
  FiniteSOCProblem p(0, {64, 1}, {2}, {1});
  CHECK(count_policies(p) == std::numeric_limits<std::uint64_t>::max());
  CHECK_THROWS_AS(PolicyEnumeration(p, kDefaultPolicyCap), CapExceededError);
}

TEST_CASE("simulate rolls the dynamics and accumulates realized cost") {
  FiniteSOCProblem p(0, {2, 2, 2}, {2, 1}, {2, 2});
  // x' = x XOR w on both transitions
  for (int t = 0; t < 2; ++t)
    for (int x = 0; x < 2; ++x)
      for (int u = 0; u < p.control_size(t); ++u)
        for (int w = 0; w < 2; ++w) p.dynamics(t)(x, u, w) = x ^ w;
  p.stage_cost(0)(0, 1, 1) = 2.5;
  p.stage_cost(1)(1, 0, 0) = 4.0;
  p.final_cost() = {0.0, 10.0};

  Policy policy{0, {{1, 0}, {0, 0}}};
  const Trajectory traj = simulate(p, policy, 0, {1, 0});
  CHECK(traj.states == std::vector<int>{0, 1, 1});
  CHECK(traj.controls == std::vector<int>{1, 0});
  CHECK(traj.noises == std::vector<int>{1, 0});
  CHECK(traj.realized_cost == 2.5 + 4.0 + 10.0);

  CHECK_THROWS_AS(simulate(p, policy, 5, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(p, policy, 0, {1}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(p, policy, 0, {1, 7}), std::invalid_argument);
}

TEST_CASE("monte carlo rollouts agree with exact evaluation") {
  Rng rng(123);
  const FiniteSOCProblem p = random_problem(rng);
  const Policy policy = random_policy(rng, p);
  const int t0 = p.first_stage();
  const int x0 = uniform_index(rng, p.state_size(t0));
  const double exact = evaluate_policy_exact(p, policy, dirac_law(t0, p.state_size(t0), x0));

  const int runs = 20000;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<int> draws(static_cast<std::size_t>(p.num_stages()));
  for (int i = 0; i < runs; ++i) {
    for (int k = 0; k < p.num_stages(); ++k)
      draws[static_cast<std::size_t>(k)] = sample_index(rng, p.noise_law(t0 + k));
    const double c = simulate(p, policy, x0, draws).realized_cost;
    sum += c;
    sum_sq += c * c;
  }
  const double mean = sum / runs;
  const double variance = (sum_sq / runs - mean * mean) * runs / (runs - 1);
  const double stderr_mean = std::sqrt(variance / runs);
  CHECK(std::abs(mean - exact) < 3.0 * stderr_mean + 1e-9);
}

TEST_CASE("noise-free problems reduce to open-loop planning") {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    Rng rng(seed);
    const FiniteSOCProblem p = random_deterministic_problem(rng);
    const int t0 = p.first_stage();
    const int x0 = uniform_index(rng, p.state_size(t0));

    const OpenLoopPlan plan = solve_deterministic(p, x0);
    CHECK(plan.first_stage == t0);
    CHECK(static_cast<int>(plan.controls.size()) == p.num_stages());

    const oracles::OpenLoopBruteForce brute = oracles::brute_force_open_loop(p, x0);
    CHECK(std::abs(plan.cost - brute.cost) < 1e-11);

    // replaying the plan as a constant-in-noise policy gives the same cost
    const DpSolution sol = solve_dp(p);
    CHECK(plan.cost == sol.value.at(t0, x0));
  }

  Rng rng(50);
  const FiniteSOCProblem noisy = random_problem(rng, {.min_noises = 2, .max_noises = 2});
  CHECK_THROWS_AS(solve_deterministic(noisy, 0), std::invalid_argument);
}

TEST_CASE("policy truncation preserves the remaining stages") {
  Rng rng(60);
  const FiniteSOCProblem p = random_problem(rng, {.min_stages = 3, .max_stages = 3});
  const DpSolution sol = solve_dp(p);
  const Policy tail = truncate(sol.policy, p.first_stage() + 1);
  CHECK(tail.first_stage == p.first_stage() + 1);
  CHECK(tail.feedback.size() == sol.policy.feedback.size() - 1);
  for (int t = tail.first_stage; t < p.last_stage(); ++t) CHECK(tail.at(t) == sol.policy.at(t));
}

TEST_CASE("repeated solves are bitwise identical") {
  Rng rng1(77), rng2(77);
  const FiniteSOCProblem p1 = random_problem(rng1);
  const FiniteSOCProblem p2 = random_problem(rng2);
  const DpSolution a = solve_dp(p1);
  const DpSolution b = solve_dp(p2);
  REQUIRE(a.value.value.size() == b.value.value.size());
  for (std::size_t k = 0; k < a.value.value.size(); ++k) {
    REQUIRE(a.value.value[k].size() == b.value.value[k].size());
    for (std::size_t x = 0; x < a.value.value[k].size(); ++x)
      CHECK(a.value.value[k][x] == b.value.value[k][x]);  // exact, not approximate
  }
  for (std::size_t k = 0; k < a.policy.feedback.size(); ++k)
    CHECK(a.policy.feedback[k] == b.policy.feedback[k]);
}
