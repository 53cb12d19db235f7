#include <algorithm>
#include <numeric>
#include <vector>

#include "fairworld/kernels.hpp"

namespace fairworld::kernels {

std::vector<SortedFeature> presort(const FeatureMatrix& x) {
  std::vector<SortedFeature> out(x.n_cols);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(x.n_cols); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto col = x.column(j);
    auto& sf = out[j];
    sf.rows.resize(x.n_rows);
    std::iota(sf.rows.begin(), sf.rows.end(), std::uint32_t{0});
    std::stable_sort(sf.rows.begin(), sf.rows.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    sf.values.resize(x.n_rows);
    for (std::size_t k = 0; k < x.n_rows; ++k) sf.values[k] = col[sf.rows[k]];
  }
  return out;
}

namespace {

// Scans one feature and updates `best` (one entry per node) in place.
void scan_feature(const SplitProblem& p, int feature, std::span<SplitCandidate> best) {
  const std::size_t n_nodes = p.node_grad.size();
  std::vector<double> gl(n_nodes, 0.0), hl(n_nodes, 0.0), last(n_nodes, 0.0);
  std::vector<char> seen(n_nodes, 0);
  std::vector<double> parent_score(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    parent_score[k] = p.node_grad[k] * p.node_grad[k] / (p.node_hess[k] + p.l2);
  }

  const auto& sf = p.features[static_cast<std::size_t>(feature)];
  const std::size_t n = sf.rows.size();
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = sf.rows[r];
    const int node = p.node_of_row[row];
    if (node < 0) continue;
    const auto k = static_cast<std::size_t>(node);
    const double x = sf.values[r];
    if (seen[k] && x != last[k]) {
      const double hr = p.node_hess[k] - hl[k];
      if (hl[k] >= p.min_child_hessian && hr >= p.min_child_hessian) {
        const double gr = p.node_grad[k] - gl[k];
        const double gain = gl[k] * gl[k] / (hl[k] + p.l2) + gr * gr / (hr + p.l2) - parent_score[k];
        if (gain > best[k].gain) {
          double thr = last[k] + 0.5 * (x - last[k]);
          if (!(thr < x)) thr = last[k];
          best[k] = {gain, feature, thr};
        }
      }
    }
    gl[k] += p.grad[row];
    hl[k] += p.hess[row];
    last[k] = x;
    seen[k] = 1;
  }
}

void reduce_into(std::span<SplitCandidate> best, const std::vector<std::vector<SplitCandidate>>& per_feature) {
  for (std::size_t k = 0; k < best.size(); ++k) {
    SplitCandidate b{};
    for (const auto& f : per_feature) {
      if (f[k].gain > b.gain) b = f[k];
    }
    best[k] = b;
  }
}

}  // namespace

void find_best_splits_serial(const SplitProblem& problem, std::span<SplitCandidate> best) {
  const std::size_t n_features = problem.features.size();
  std::vector<std::vector<SplitCandidate>> per_feature(n_features,
                                                      std::vector<SplitCandidate>(problem.node_grad.size()));
  for (std::size_t j = 0; j < n_features; ++j) scan_feature(problem, static_cast<int>(j), per_feature[j]);
  reduce_into(best, per_feature);
}

void find_best_splits_omp(const SplitProblem& problem, std::span<SplitCandidate> best) {
  const std::size_t n_features = problem.features.size();
  std::vector<std::vector<SplitCandidate>> per_feature(n_features,
                                                      std::vector<SplitCandidate>(problem.node_grad.size()));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n_features); ++j) {
    scan_feature(problem, static_cast<int>(j), per_feature[static_cast<std::size_t>(j)]);
  }
  reduce_into(best, per_feature);
}

}  // namespace fairworld::kernels
