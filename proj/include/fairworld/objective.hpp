#pragma once

#include <span>
#include <vector>

namespace fairworld {

// Snapshot of the penalised objective at the current scores.
struct ObjectiveState {
  std::vector<double> probs;
  std::size_t n_protected = 0;  // N_a
  std::size_t n_reference = 0;  // N_a'
  double mean_protected = 0.0;
  double mean_reference = 0.0;

  double disparity() const noexcept { return mean_protected - mean_reference; }
};

ObjectiveState objective_state(std::span<const double> scores, std::span<const int> groups);

struct GradHess {
  std::vector<double> grad;
  std::vector<double> hess;
};

// Gradient of  sum_i L(y_i, f_i) + lambda * |mean_a(p) - mean_a'(p)|  w.r.t. the
// scores, with the Bernoulli-loss Hessian only. Subgradient 0 at the kink.
// Throws EmptyGroup if lambda > 0 and a group is empty.
GradHess objective_grad(const ObjectiveState& state, std::span<const int> labels, std::span<const int> groups,
                        double lambda);

// sum_i [log(1 + e^f_i) - y_i f_i] + lambda * C(p).
double regularized_risk(std::span<const double> scores, std::span<const int> labels, std::span<const int> groups,
                        double lambda);

}  // namespace fairworld
