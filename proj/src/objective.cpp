#include "fairworld/objective.hpp"

#include <cmath>

#include "fairworld/error.hpp"
#include "fairworld/kernels.hpp"

namespace fairworld {

namespace {

kernels::GroupMeans as_means(const ObjectiveState& s) {
  kernels::GroupMeans m;
  m.mean[0] = s.mean_reference;
  m.mean[1] = s.mean_protected;
  m.count[0] = s.n_reference;
  m.count[1] = s.n_protected;
  return m;
}

double softplus(double f) { return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f)); }

}  // namespace

ObjectiveState objective_state(std::span<const double> scores, std::span<const int> groups) {
  ObjectiveState s;
  s.probs.resize(scores.size());
  const auto m = kernels::sigmoid_and_group_means_omp(scores, groups, s.probs);
  s.mean_reference = m.mean[0];
  s.mean_protected = m.mean[1];
  s.n_reference = m.count[0];
  s.n_protected = m.count[1];
  return s;
}

GradHess objective_grad(const ObjectiveState& state, std::span<const int> labels, std::span<const int> groups,
                        double lambda) {
  if (lambda > 0.0 && (state.n_protected == 0 || state.n_reference == 0)) {
    throw EmptyGroup("fairness penalty needs both protected-attribute groups to be non-empty");
  }
  GradHess gh;
  gh.grad.resize(state.probs.size());
  gh.hess.resize(state.probs.size());
  kernels::penalised_gradient_omp(state.probs, labels, groups, as_means(state), lambda, gh.grad, gh.hess);
  return gh;
}

double regularized_risk(std::span<const double> scores, std::span<const int> labels, std::span<const int> groups,
                        double lambda) {
  double loss = 0.0;
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    loss += softplus(scores[i]) - labels[i] * scores[i];
    sum[groups[i]] += 1.0 / (1.0 + std::exp(-scores[i]));
    ++cnt[groups[i]];
  }
  if (lambda == 0.0) return loss;
  if (cnt[0] == 0 || cnt[1] == 0) throw EmptyGroup("fairness penalty needs both groups");
  return loss + lambda * std::abs(sum[1] / static_cast<double>(cnt[1]) - sum[0] / static_cast<double>(cnt[0]));
}

}  // namespace fairworld
