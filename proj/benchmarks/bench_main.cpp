#include <benchmark/benchmark.h>

#include "socdp/audit.hpp"
#include "socdp/constrained.hpp"
#include "socdp/dp.hpp"
#include "socdp/fokker_planck.hpp"
#include "socdp/generators.hpp"
#include "socdp/rng.hpp"

namespace {

socdp::FiniteSOCProblem sized_problem(int nx, int nu, int nw, int stages) {
  socdp::Rng rng(12345);
  socdp::RandomProblemSpec spec;
  spec.min_states = spec.max_states = nx;
  spec.min_controls = spec.max_controls = nu;
  spec.min_noises = spec.max_noises = nw;
  spec.min_stages = spec.max_stages = stages;
  return socdp::random_problem(rng, spec);
}

void BM_SolveDp(benchmark::State& state) {
  const auto problem = sized_problem(static_cast<int>(state.range(0)), 4, 4, 12);
  for (auto _ : state) benchmark::DoNotOptimize(socdp::solve_dp(problem));
}
BENCHMARK(BM_SolveDp)->Arg(8)->Arg(32)->Arg(128);

void BM_PushForward(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const auto problem = sized_problem(nx, 4, 4, 2);
  socdp::Rng rng(7);
  const socdp::Law mu = socdp::random_law(rng, 0, problem.state_size(0));
  const socdp::Policy policy = socdp::random_policy(rng, problem);
  for (auto _ : state)
    benchmark::DoNotOptimize(socdp::push_forward(problem, 0, policy.at(0), mu));
}
BENCHMARK(BM_PushForward)->Arg(8)->Arg(64)->Arg(512);

void BM_ForwardCost(benchmark::State& state) {
  const auto problem = sized_problem(static_cast<int>(state.range(0)), 4, 4, 12);
  socdp::Rng rng(7);
  const socdp::Law mu = socdp::random_law(rng, 0, problem.state_size(0));
  const socdp::Policy policy = socdp::random_policy(rng, problem);
  for (auto _ : state)
    benchmark::DoNotOptimize(socdp::forward_cost(problem, policy, mu));
}
BENCHMARK(BM_ForwardCost)->Arg(8)->Arg(32)->Arg(128);

void BM_EnumeratePolicies(benchmark::State& state) {
  const auto problem = sized_problem(3, 2, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    socdp::PolicyEnumeration policies = socdp::enumerate_policies(problem);
    std::uint64_t count = 0;
    while (policies.next().has_value()) ++count;
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_EnumeratePolicies)->Arg(1)->Arg(2);

void BM_SolveConstrained(benchmark::State& state) {
  socdp::Rng rng(424242 + static_cast<std::uint64_t>(state.range(0)));
  const socdp::ConstrainedInstance instance = socdp::random_constrained_instance(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(socdp::solve_constrained(instance.problem, instance.initial));
}
BENCHMARK(BM_SolveConstrained)->Arg(0)->Arg(1);

void BM_AuditNaive(benchmark::State& state) {
  socdp::Rng rng(99);
  socdp::ConstrainedInstance instance = socdp::random_constrained_instance(rng);
  while (!socdp::solve_constrained(instance.problem, instance.initial).feasible())
    instance = socdp::random_constrained_instance(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        socdp::audit_constrained_naive(instance.problem, instance.initial));
}
BENCHMARK(BM_AuditNaive);

}  // namespace

BENCHMARK_MAIN();
