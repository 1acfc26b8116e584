#include "socdp/problem.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace socdp {

namespace {

std::string format_stage_error(int t, const char* what) {
  std::ostringstream os;
  os << "stage " << t << ": " << what;
  return os.str();
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i > 0) os << "; ";
    os << "[stage " << issues[i].stage << "] " << issues[i].message;
  }
  return os.str();
}

FiniteSOCProblem::FiniteSOCProblem(int first_stage, std::vector<int> state_sizes,
                                   std::vector<int> control_sizes,
                                   std::vector<int> noise_sizes)
    : first_stage_(first_stage),
      state_sizes_(std::move(state_sizes)),
      control_sizes_(std::move(control_sizes)),
      noise_sizes_(std::move(noise_sizes)) {
  const std::size_t n = control_sizes_.size();
  if (n < 1) throw std::invalid_argument("problem needs at least one stage");
  if (state_sizes_.size() != n + 1)
    throw std::invalid_argument("state_sizes must have one entry per stage plus the final one");
  if (noise_sizes_.size() != n)
    throw std::invalid_argument("noise_sizes must have one entry per transition");
  for (int s : state_sizes_)
    if (s < 1) throw std::invalid_argument("state spaces must be nonempty");
  for (int s : control_sizes_)
    if (s < 1) throw std::invalid_argument("control spaces must be nonempty");
  for (int s : noise_sizes_)
    if (s < 1) throw std::invalid_argument("noise spaces must be nonempty");

  dynamics_.reserve(n);
  stage_costs_.reserve(n);
  noise_laws_.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    dynamics_.emplace_back(state_sizes_[k], control_sizes_[k], noise_sizes_[k], 0);
    stage_costs_.emplace_back(state_sizes_[k], control_sizes_[k], noise_sizes_[k], 0.0);
    noise_laws_.emplace_back(noise_sizes_[k], 1.0 / noise_sizes_[k]);
  }
  final_cost_.assign(state_sizes_.back(), 0.0);
}

std::size_t FiniteSOCProblem::state_offset(int t) const {
  const int k = t - first_stage_;
  if (k < 0 || k > num_stages())
    throw std::out_of_range(format_stage_error(t, "outside the problem horizon"));
  return static_cast<std::size_t>(k);
}

std::size_t FiniteSOCProblem::transition_offset(int t) const {
  const int k = t - first_stage_;
  if (k < 0 || k >= num_stages())
    throw std::out_of_range(format_stage_error(t, "not a transition stage"));
  return static_cast<std::size_t>(k);
}

bool FiniteSOCProblem::is_deterministic() const {
  for (int s : noise_sizes_)
    if (s != 1) return false;
  return true;
}

ValidationReport validate(const FiniteSOCProblem& problem) {
  ValidationReport report;
  const int t0 = problem.first_stage();
  for (int t = t0; t < problem.last_stage(); ++t) {
    const auto& law = problem.noise_law(t);
    if (static_cast<int>(law.size()) != problem.noise_size(t)) {
      std::ostringstream os;
      os << "noise law has " << law.size() << " entries but the noise space has "
         << problem.noise_size(t);
      report.issues.push_back({t, os.str()});
    } else {
      double sum = 0.0;
      bool negative = false;
      for (double p : law) {
        sum += p;
        if (p < 0.0) negative = true;
      }
      if (negative) report.issues.push_back({t, "noise law has a negative entry"});
      if (std::abs(sum - 1.0) > kLawNormalizationTol) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "noise law sums to %g", sum);
        report.issues.push_back({t, buf});
      }
    }

    const auto& f = problem.dynamics(t);
    const int next_size = problem.state_size(t + 1);
    for (int x = 0; x < problem.state_size(t); ++x) {
      for (int u = 0; u < problem.control_size(t); ++u) {
        for (int w = 0; w < problem.noise_size(t); ++w) {
          const int y = f(x, u, w);
          if (y < 0 || y >= next_size) {
            std::ostringstream os;
            os << "out-of-range next state " << y << " at (x=" << x << ", u=" << u
               << ", w=" << w << "); state space at stage " << (t + 1) << " has size "
               << next_size;
            report.issues.push_back({t, os.str()});
          }
        }
      }
    }
  }
  return report;
}

void require_valid(const FiniteSOCProblem& problem) {
  const ValidationReport report = validate(problem);
  if (!report.ok())
    throw std::invalid_argument("invalid problem: " + report.to_string());
}

FiniteSOCProblem truncate(const FiniteSOCProblem& problem, int from_stage) {
  const int t0 = problem.first_stage();
  const int T = problem.last_stage();
  if (from_stage < t0 || from_stage >= T)
    throw std::invalid_argument("truncate: from_stage must lie in [first_stage, last_stage)");

  std::vector<int> nx, nu, nw;
  for (int t = from_stage; t <= T; ++t) nx.push_back(problem.state_size(t));
  for (int t = from_stage; t < T; ++t) {
    nu.push_back(problem.control_size(t));
    nw.push_back(problem.noise_size(t));
  }
  FiniteSOCProblem sub(from_stage, std::move(nx), std::move(nu), std::move(nw));
  for (int t = from_stage; t < T; ++t) {
    sub.dynamics(t) = problem.dynamics(t);
    sub.stage_cost(t) = problem.stage_cost(t);
    sub.noise_law(t) = problem.noise_law(t);
  }
  sub.final_cost() = problem.final_cost();
  return sub;
}

}  // namespace socdp
