#pragma once

#include <vector>

#include "socdp/constrained.hpp"
#include "socdp/dp.hpp"
#include "socdp/law.hpp"
#include "socdp/problem.hpp"
#include "socdp/rng.hpp"

namespace socdp {

// Size and magnitude ranges for seeded random instances. All ranges are
// inclusive; per-stage sizes are drawn independently.
struct RandomProblemSpec {
  int first_stage = 0;
  int min_states = 2, max_states = 4;
  int min_controls = 1, max_controls = 3;
  int min_noises = 1, max_noises = 3;
  int min_stages = 1, max_stages = 4;
  double cost_lo = 0.0, cost_hi = 5.0;
};

// Uniformly random dynamics tables, costs in [cost_lo, cost_hi), and strictly
// positive noise laws.
FiniteSOCProblem random_problem(Rng& rng, const RandomProblemSpec& spec = {});

// Same, with every noise space a singleton.
FiniteSOCProblem random_deterministic_problem(Rng& rng, const RandomProblemSpec& spec = {});

Policy random_policy(Rng& rng, const FiniteSOCProblem& problem);

// Strictly positive random law at the given stage.
Law random_law(Rng& rng, int stage, int size);

// Noise-free problem whose state is a physical value on a per-stage grid:
// each control multiplies the value by a fixed factor, the running cost is a
// per-control rate times the value, and the terminal cost is a rate times
// the value. Optimal control sequences are therefore independent of the
// initial value and optimal costs scale linearly with it. Factors and
// initial values must be exactly representable products (dyadic rationals)
// so that grid lookup is exact.
struct MultiplicativeGridSpec {
  int first_stage = 0;
  int num_stages = 3;
  std::vector<double> factors = {0.5, 1.25, 2.0};     // per-control growth
  std::vector<double> run_rates = {0.25, 1.0, 0.5};   // per-control cost rate
  double final_rate = 1.0;
  std::vector<double> initial_values = {1.0, 2.0};
};

struct MultiplicativeGridInstance {
  FiniteSOCProblem problem;
  std::vector<std::vector<double>> grid;  // physical value per (stage offset, state idx)

  // State index of an exactly matching grid value; throws when absent.
  int state_of(int stage, double value) const;
};

MultiplicativeGridInstance make_multiplicative_grid(const MultiplicativeGridSpec& spec = {});

// Family used by the inconsistency search and the constrained sweeps: small
// stochastic problems with a chance constraint on the terminal state.
struct RandomConstrainedSpec {
  RandomProblemSpec base{.min_states = 2,
                         .max_states = 3,
                         .min_controls = 2,
                         .max_controls = 2,
                         .min_noises = 2,
                         .max_noises = 2,
                         .min_stages = 2,
                         .max_stages = 3};
  std::vector<double> probability_levels = {0.1, 0.2, 0.3, 0.4, 0.5};
};

struct ConstrainedInstance {
  ConstrainedProblem problem;
  std::vector<double> h;  // raw chance-constraint ingredients: P(h(x_T) >= b) <= pi
  double b = 0.0;
  double pi = 0.0;
  int initial_state = 0;
  Law initial;  // Dirac at initial_state
};

ConstrainedInstance random_constrained_instance(Rng& rng, const RandomConstrainedSpec& spec = {});

// True when the chance constraint binds: the unconstrained optimal policy's
// terminal law violates it.
bool constraint_binds(const ConstrainedInstance& instance);

// True when some feedback policy's terminal constraint load lands within
// `margin` of the level — a knife-edge instance that seeded sweeps reject so
// feasibility classification cannot hinge on rounding.
bool near_constraint_boundary(const ConstrainedProblem& problem, const Law& initial,
                              double margin);

}  // namespace socdp
