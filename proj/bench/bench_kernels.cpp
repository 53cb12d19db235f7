// Serial reference vs OpenMP kernels on synthetic inputs.
// usage: bench_kernels [rows=200000] [repeats=5]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "fairworld/kernels.hpp"
#include "fairworld/random.hpp"

using namespace fairworld;
using clk = std::chrono::steady_clock;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clk::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(clk::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-22s %10.2f %10.2f %8.2fx\n", name, serial_ms, omp_ms, serial_ms / omp_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  const std::size_t n_features = 4;

  Rng rng(42);
  FeatureMatrix x(n, n_features);
  std::vector<double> scores(n), probs(n), grad(n), hess(n);
  std::vector<int> labels(n), groups(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_features; ++j) x(i, j) = std::floor(rng.uniform() * 1000.0);
    scores[i] = rng.uniform(-3.0, 3.0);
    groups[i] = rng.uniform() < 0.5;
    labels[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-scores[i]));
  }

  std::printf("rows=%zu threads=%d repeats=%d\n", n, omp_get_max_threads(), repeats);
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  kernels::GroupMeans means;
  row("sigmoid_group_means",
      best_of(repeats, [&] { means = kernels::sigmoid_and_group_means_serial(scores, groups, probs); }),
      best_of(repeats, [&] { means = kernels::sigmoid_and_group_means_omp(scores, groups, probs); }));
  row("penalised_gradient",
      best_of(repeats, [&] { kernels::penalised_gradient_serial(probs, labels, groups, means, 10.0, grad, hess); }),
      best_of(repeats, [&] { kernels::penalised_gradient_omp(probs, labels, groups, means, 10.0, grad, hess); }));

  const auto sorted = kernels::presort(x);
  const int nodes = 8;
  std::vector<int> node_of_row(n);
  std::vector<double> node_grad(nodes, 0.0), node_hess(nodes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    node_of_row[i] = static_cast<int>(i % nodes);
    node_grad[node_of_row[i]] += grad[i];
    node_hess[node_of_row[i]] += hess[i];
  }
  const kernels::SplitProblem problem{sorted, node_of_row, grad, hess, node_grad, node_hess, 1.0, 1.0};
  std::vector<kernels::SplitCandidate> best(nodes);
  row("find_best_splits", best_of(repeats, [&] { kernels::find_best_splits_serial(problem, best); }),
      best_of(repeats, [&] { kernels::find_best_splits_omp(problem, best); }));

  // 100 random complete depth-4 trees.
  std::vector<Tree> trees(100);
  for (auto& tree : trees) {
    tree.nodes.resize(31);
    for (std::size_t k = 0; k < 15; ++k) {
      tree.nodes[k].feature = static_cast<int>(rng.uniform() * n_features);
      tree.nodes[k].threshold = std::floor(rng.uniform() * 1000.0);
      tree.nodes[k].left = static_cast<int>(2 * k + 1);
      tree.nodes[k].right = static_cast<int>(2 * k + 2);
    }
    for (std::size_t k = 15; k < 31; ++k) tree.nodes[k].value = rng.uniform(-0.1, 0.1);
  }
  std::vector<double> margin(n);
  row("predict_margin", best_of(repeats, [&] { kernels::predict_margin_serial(trees, 0.0, x, margin); }),
      best_of(repeats, [&] { kernels::predict_margin_omp(trees, 0.0, x, margin); }));

  const std::size_t boot_n = std::min<std::size_t>(n, 20000);
  const std::span<const double> boot_scores(scores.data(), boot_n);
  const std::span<const int> boot_labels(labels.data(), boot_n);
  row("bootstrap_auc x200",
      best_of(repeats, [&] { kernels::bootstrap_auc_serial(boot_scores, boot_labels, 200, 7); }),
      best_of(repeats, [&] { kernels::bootstrap_auc_omp(boot_scores, boot_labels, 200, 7); }));
  return 0;
}
