#pragma once

#include <string>
#include <vector>

namespace socdp {

// Absolute tolerance for grouping near-equal minima before tie-breaking.
inline constexpr double kTieTolerance = 1e-12;

// Tolerance on probability-vector normalization.
inline constexpr double kLawNormalizationTol = 1e-12;

// Probability mass below this is treated as unreachable.
inline constexpr double kSupportTol = 1e-12;

// Dense table indexed by (state, control, noise) for one transition stage.
template <typename T>
class StageTable {
 public:
  StageTable() : nx_(0), nu_(0), nw_(0) {}
  StageTable(int nx, int nu, int nw, T init = T{})
      : nx_(nx), nu_(nu), nw_(nw),
        data_(static_cast<std::size_t>(nx) * nu * nw, init) {}

  T& operator()(int x, int u, int w) {
    return data_[index(x, u, w)];
  }
  const T& operator()(int x, int u, int w) const {
    return data_[index(x, u, w)];
  }

  int num_states() const { return nx_; }
  int num_controls() const { return nu_; }
  int num_noises() const { return nw_; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

 private:
  std::size_t index(int x, int u, int w) const {
    return (static_cast<std::size_t>(x) * nu_ + u) * nw_ + w;
  }

  int nx_, nu_, nw_;
  std::vector<T> data_;
};

using DynamicsTable = StageTable<int>;
using CostTable = StageTable<double>;

struct ValidationIssue {
  int stage;  // absolute stage index the issue refers to
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Finite-horizon stochastic optimal control problem with finite state,
// control, and noise spaces. Stages run over absolute indices
// first_stage .. last_stage; all spaces are index sets 0..n-1.
//
// Transition k (from stage first_stage+k to first_stage+k+1) is driven by
// the noise drawn from noise_law(t) with t = first_stage+k, and noises at
// distinct transitions are independent by construction: every operation in
// this library samples or sums them stage by stage from their own law.
class FiniteSOCProblem {
 public:
  // Sizes are fixed at construction; state_sizes has one entry more than
  // control_sizes and noise_sizes. Dynamics default to next-state 0, costs
  // to 0, noise laws to uniform, so a fresh problem is valid.
  FiniteSOCProblem(int first_stage, std::vector<int> state_sizes,
                   std::vector<int> control_sizes, std::vector<int> noise_sizes);

  int first_stage() const { return first_stage_; }
  int last_stage() const { return first_stage_ + num_stages(); }
  int num_stages() const { return static_cast<int>(control_sizes_.size()); }

  int state_size(int t) const { return state_sizes_[state_offset(t)]; }
  int control_size(int t) const { return control_sizes_[transition_offset(t)]; }
  // Size of the noise space for the transition leaving stage t.
  int noise_size(int t) const { return noise_sizes_[transition_offset(t)]; }

  DynamicsTable& dynamics(int t) { return dynamics_[transition_offset(t)]; }
  const DynamicsTable& dynamics(int t) const { return dynamics_[transition_offset(t)]; }

  CostTable& stage_cost(int t) { return stage_costs_[transition_offset(t)]; }
  const CostTable& stage_cost(int t) const { return stage_costs_[transition_offset(t)]; }

  // Law of the noise drawn on the transition leaving stage t.
  std::vector<double>& noise_law(int t) { return noise_laws_[transition_offset(t)]; }
  const std::vector<double>& noise_law(int t) const { return noise_laws_[transition_offset(t)]; }

  std::vector<double>& final_cost() { return final_cost_; }
  const std::vector<double>& final_cost() const { return final_cost_; }

  bool is_deterministic() const;

 private:
  std::size_t state_offset(int t) const;
  std::size_t transition_offset(int t) const;

  int first_stage_;
  std::vector<int> state_sizes_;    // length N+1
  std::vector<int> control_sizes_;  // length N
  std::vector<int> noise_sizes_;    // length N
  std::vector<DynamicsTable> dynamics_;
  std::vector<CostTable> stage_costs_;
  std::vector<std::vector<double>> noise_laws_;
  std::vector<double> final_cost_;
};

// Checks every structural invariant: noise-law normalization and
// nonnegativity, and that dynamics outputs land in the next stage's state
// space. An empty report means the problem is valid.
ValidationReport validate(const FiniteSOCProblem& problem);

// Throws std::invalid_argument with the full issue list if invalid.
void require_valid(const FiniteSOCProblem& problem);

// The subproblem over stages from_stage .. last_stage.
FiniteSOCProblem truncate(const FiniteSOCProblem& problem, int from_stage);

}  // namespace socdp
