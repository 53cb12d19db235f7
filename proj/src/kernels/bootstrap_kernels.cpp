#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fairworld/kernels.hpp"
#include "fairworld/random.hpp"

namespace fairworld::kernels {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sort-based Mann-Whitney AUC, ties count one half.
double auc_by_sort(std::vector<double> scores, std::vector<int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0, neg = 0.0, num = 0.0, neg_below = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double gp = 0.0, gn = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? gp : gn) += 1.0;
      ++j;
    }
    num += gp * neg_below + 0.5 * gp * gn;
    neg_below += gn;
    pos += gp;
    neg += gn;
    i = j;
  }
  return pos > 0.0 && neg > 0.0 ? num / (pos * neg) : kNaN;
}

}  // namespace

std::vector<double> bootstrap_auc_serial(std::span<const double> scores, std::span<const int> labels,
                                         std::size_t replicates, std::uint64_t seed) {
  const std::size_t n = scores.size();
  std::vector<double> out(replicates);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t b = 0; b < replicates; ++b) {
    Rng rng(derive_seed(seed, "auc-bootstrap", b));
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rng.below(n);
      s[i] = scores[r];
      y[i] = labels[r];
    }
    out[b] = auc_by_sort(s, y);
  }
  return out;
}

std::vector<double> bootstrap_auc_omp(std::span<const double> scores, std::span<const int> labels,
                                      std::size_t replicates, std::uint64_t seed) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Tie groups over the sorted order.
  std::vector<std::size_t> group_start;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || scores[order[i]] != scores[order[i - 1]]) group_start.push_back(i);
  }
  group_start.push_back(n);

  std::vector<double> out(replicates);
#pragma omp parallel
  {
    std::vector<std::uint32_t> count(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(replicates); ++bb) {
      const auto b = static_cast<std::size_t>(bb);
      std::fill(count.begin(), count.end(), 0u);
      Rng rng(derive_seed(seed, "auc-bootstrap", b));
      for (std::size_t i = 0; i < n; ++i) ++count[rng.below(n)];
      double pos = 0.0, neg = 0.0, num = 0.0;
      for (std::size_t g = 0; g + 1 < group_start.size(); ++g) {
        double gp = 0.0, gn = 0.0;
        for (std::size_t k = group_start[g]; k < group_start[g + 1]; ++k) {
          const auto r = order[k];
          (labels[r] ? gp : gn) += count[r];
        }
        num += gp * neg + 0.5 * gp * gn;  // `neg` holds negatives strictly below this group
        neg += gn;
        pos += gp;
      }
      out[b] = pos > 0.0 && neg > 0.0 ? num / (pos * neg) : kNaN;
    }
  }
  return out;
}

}  // namespace fairworld::kernels
