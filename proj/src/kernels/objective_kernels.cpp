#include <algorithm>
#include <cmath>
#include <vector>

#include "fairworld/kernels.hpp"

namespace fairworld::kernels {

namespace {

constexpr std::size_t kChunk = 4096;

inline double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

inline double penalty_weight(int group, const GroupMeans& m, double lambda) {
  if (lambda == 0.0) return 0.0;
  const double delta = m.mean[1] - m.mean[0];
  const double s = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
  const double c = group == 1 ? 1.0 / static_cast<double>(m.count[1]) : -1.0 / static_cast<double>(m.count[0]);
  return lambda * s * c;
}

inline void finish_means(GroupMeans& m, const double sums[2]) {
  for (int g = 0; g < 2; ++g) m.mean[g] = m.count[g] ? sums[g] / static_cast<double>(m.count[g]) : 0.0;
}

}  // namespace

GroupMeans sigmoid_and_group_means_serial(std::span<const double> scores, std::span<const int> groups,
                                          std::span<double> probs) {
  // Same summation order as the OpenMP version: per-chunk partials, then chunks in order.
  GroupMeans m;
  double sums[2] = {0.0, 0.0};
  for (std::size_t lo = 0; lo < scores.size(); lo += kChunk) {
    const std::size_t hi = std::min(scores.size(), lo + kChunk);
    double s[2] = {0.0, 0.0};
    for (std::size_t i = lo; i < hi; ++i) {
      probs[i] = sigmoid(scores[i]);
      const int g = groups[i];
      s[g] += probs[i];
      ++m.count[g];
    }
    sums[0] += s[0];
    sums[1] += s[1];
  }
  finish_means(m, sums);
  return m;
}

GroupMeans sigmoid_and_group_means_omp(std::span<const double> scores, std::span<const int> groups,
                                       std::span<double> probs) {
  const std::size_t n = scores.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> part(2 * chunks, 0.0);
  std::vector<std::size_t> cnt(2 * chunks, 0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    double s[2] = {0.0, 0.0};
    std::size_t k[2] = {0, 0};
    for (std::size_t i = lo; i < hi; ++i) {
      probs[i] = sigmoid(scores[i]);
      s[groups[i]] += probs[i];
      ++k[groups[i]];
    }
    part[2 * c] = s[0];
    part[2 * c + 1] = s[1];
    cnt[2 * c] = k[0];
    cnt[2 * c + 1] = k[1];
  }

  GroupMeans m;
  double sums[2] = {0.0, 0.0};
  for (std::size_t c = 0; c < chunks; ++c) {
    for (int g = 0; g < 2; ++g) {
      sums[g] += part[2 * c + g];
      m.count[g] += cnt[2 * c + g];
    }
  }
  finish_means(m, sums);
  return m;
}

void penalised_gradient_serial(std::span<const double> probs, std::span<const int> labels,
                               std::span<const int> groups, const GroupMeans& means, double lambda,
                               std::span<double> grad, std::span<double> hess) {
  const double w[2] = {penalty_weight(0, means, lambda), penalty_weight(1, means, lambda)};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    const double v = p * (1.0 - p);
    grad[i] = (p - labels[i]) + w[groups[i]] * v;
    hess[i] = v;
  }
}

void penalised_gradient_omp(std::span<const double> probs, std::span<const int> labels,
                            std::span<const int> groups, const GroupMeans& means, double lambda,
                            std::span<double> grad, std::span<double> hess) {
  const double w[2] = {penalty_weight(0, means, lambda), penalty_weight(1, means, lambda)};
  const auto n = static_cast<std::ptrdiff_t>(probs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double p = probs[i];
    const double v = p * (1.0 - p);
    grad[i] = (p - labels[i]) + w[groups[i]] * v;
    hess[i] = v;
  }
}

}  // namespace fairworld::kernels
