#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "socdp/dp.hpp"
#include "socdp/fokker_planck.hpp"
#include "socdp/generators.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"
#include "socdp/rng.hpp"

using namespace socdp;

namespace {

CostFunction random_function(Rng& rng, int stage, int size) {
  CostFunction psi{stage, std::vector<double>(static_cast<std::size_t>(size))};
  for (double& v : psi.values) v = uniform_real(rng, 0.0, 5.0);
  return psi;
}

}  // namespace

TEST_CASE("backward transport is the adjoint of forward transport") {
  for (std::uint64_t seed = 100; seed < 125; ++seed) {
    Rng rng(seed);
    const FiniteSOCProblem p = random_problem(rng);
    const Policy policy = random_policy(rng, p);
    Law mu = random_law(rng, p.first_stage(), p.state_size(p.first_stage()));
    for (int t = p.first_stage(); t < p.last_stage(); ++t) {
      const CostFunction psi = random_function(rng, t + 1, p.state_size(t + 1));
      const CostFunction pulled = backward_operator(p, t, policy.at(t), psi);
      const Law pushed = push_forward(p, t, policy.at(t), mu);
      CAPTURE(seed);
      CAPTURE(t);
      CHECK(std::abs(pairing(pulled, mu) - pairing(psi, pushed)) < 1e-12);
      mu = pushed;
    }
  }
}

TEST_CASE("law-side and function-side total costs coincide") {
  for (std::uint64_t seed = 200; seed < 225; ++seed) {
    Rng rng(seed);
    const FiniteSOCProblem p = random_problem(rng);
    const Policy policy = random_policy(rng, p);
    const Law mu = random_law(rng, p.first_stage(), p.state_size(p.first_stage()));

    const double forward = forward_cost(p, policy, mu);
    const BackwardCostResult backward = backward_cost(p, policy, mu);
    CAPTURE(seed);
    CHECK(std::abs(forward - backward.cost) < 1e-9);

    // both agree with the sparse policy evaluator
    CHECK(std::abs(forward - evaluate_policy_exact(p, policy, mu)) < 1e-11);

    // the transported function ends at the terminal cost and starts at a
    // table whose pairing with the initial law is the total cost
    const CostToGo& psi = backward.psi;
    CHECK(psi.value.back() == p.final_cost());
    double paired = 0.0;
    for (int x = 0; x < mu.size(); ++x)
      paired += psi.at(p.first_stage(), x) * mu.weights[static_cast<std::size_t>(x)];
    CHECK(paired == doctest::Approx(backward.cost).epsilon(1e-12));
  }
}

TEST_CASE("push forward conserves probability mass") {
  Rng rng(300);
  const FiniteSOCProblem p = random_problem(rng);
  const Policy policy = random_policy(rng, p);
  Law mu = random_law(rng, p.first_stage(), p.state_size(p.first_stage()));
  for (int t = p.first_stage(); t < p.last_stage(); ++t) {
    mu = push_forward(p, t, policy.at(t), mu);
    CHECK(mu.stage == t + 1);
    CHECK(mu.size() == p.state_size(t + 1));
    for (double w : mu.weights) CHECK(w >= 0.0);
    const double mass = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("backward transport of a coordinate function reads transition probabilities") {
  FiniteSOCProblem p(0, {2, 2}, {2}, {2});
  p.noise_law(0) = {0.3, 0.7};
  p.dynamics(0)(0, 1, 0) = 0;
  p.dynamics(0)(0, 1, 1) = 1;
  p.dynamics(0)(1, 0, 0) = 1;
  p.dynamics(0)(1, 0, 1) = 0;

  const CostFunction indicator{1, {0.0, 1.0}};
  const std::vector<int> feedback = {1, 0};
  const CostFunction probs = backward_operator(p, 0, feedback, indicator);
  CHECK(probs.stage == 0);
  CHECK(probs.values[0] == doctest::Approx(0.7));  // x=0, u=1 reaches state 1 iff w=1
  CHECK(probs.values[1] == doctest::Approx(0.3));  // x=1, u=0 reaches state 1 iff w=0
}

TEST_CASE("stage cost functional is the per-state expected transition cost") {
  Rng rng(310);
  const FiniteSOCProblem p = random_problem(rng);
  const Policy policy = random_policy(rng, p);
  for (int t = p.first_stage(); t < p.last_stage(); ++t) {
    const CostFunction lambda = stage_cost_functional(p, t, policy.at(t));
    CHECK(lambda.stage == t);
    REQUIRE(lambda.size() == p.state_size(t));
    for (int x = 0; x < p.state_size(t); ++x) {
      const int u = policy.at(t)[static_cast<std::size_t>(x)];
      double expected = 0.0;
      for (int w = 0; w < p.noise_size(t); ++w)
        expected += p.noise_law(t)[static_cast<std::size_t>(w)] * p.stage_cost(t)(x, u, w);
      CHECK(lambda.values[static_cast<std::size_t>(x)] == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("transport and pairing reject mismatched shapes") {
  FiniteSOCProblem p(0, {2, 3, 2}, {2, 2}, {1, 1});
  const Law mu0 = dirac_law(0, 2, 0);
  const Law mu1 = dirac_law(1, 3, 0);
  const CostFunction psi1{1, {0.0, 0.0, 0.0}};
  const CostFunction psi2{2, {0.0, 0.0}};
  const std::vector<int> feedback2 = {0, 0};
  const std::vector<int> feedback3 = {0, 0, 0};
  const std::vector<int> bad_control = {0, 5};

  // stage or size mismatches
  CHECK_THROWS_AS(pairing(psi1, mu0), std::invalid_argument);
  CHECK_THROWS_AS(pairing(CostFunction{0, {0.0, 0.0, 0.0}}, mu0), std::invalid_argument);
  CHECK_THROWS_AS(push_forward(p, 0, feedback2, mu1), std::invalid_argument);
  CHECK_THROWS_AS(push_forward(p, 1, feedback2, mu1), std::invalid_argument);  // needs 3 entries
  CHECK_THROWS_AS(backward_operator(p, 0, feedback2, psi2), std::invalid_argument);  // psi two stages ahead
  CHECK_THROWS_AS(backward_operator(p, 1, feedback3, psi1), std::invalid_argument);  // psi at wrong stage
  CHECK_THROWS_AS(backward_operator(p, 0, bad_control, psi1), std::invalid_argument);
  CHECK_NOTHROW(backward_operator(p, 1, feedback3, psi2));
  CHECK_NOTHROW(pairing(CostFunction{1, {0.0, 0.0, 0.0}}, mu1));
}
