#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference
// (`*_serial`) and an OpenMP version (`*_omp`); the library calls the OpenMP
// versions, the tests pin them against the references. OpenMP versions use
// fixed-order reductions so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairworld/tree.hpp"

namespace fairworld::kernels {

// ---- objective --------------------------------------------------------------

struct GroupMeans {
  double mean[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
};

// probs[i] = sigmoid(scores[i]); returns per-group means of probs.
GroupMeans sigmoid_and_group_means_serial(std::span<const double> scores, std::span<const int> groups,
                                          std::span<double> probs);
GroupMeans sigmoid_and_group_means_omp(std::span<const double> scores, std::span<const int> groups,
                                       std::span<double> probs);

// grad_i = (p_i - y_i) + lambda * s * c_i * p_i (1 - p_i),  hess_i = p_i (1 - p_i)
// with s = sign(mean_1 - mean_0), c_i = +1/N_1 (group 1) or -1/N_0 (group 0).
void penalised_gradient_serial(std::span<const double> probs, std::span<const int> labels,
                               std::span<const int> groups, const GroupMeans& means, double lambda,
                               std::span<double> grad, std::span<double> hess);
void penalised_gradient_omp(std::span<const double> probs, std::span<const int> labels,
                            std::span<const int> groups, const GroupMeans& means, double lambda,
                            std::span<double> grad, std::span<double> hess);

// ---- split finding ----------------------------------------------------------

// Per-feature presorted rows (ascending by value, stable in row index).
struct SortedFeature {
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
};

std::vector<SortedFeature> presort(const FeatureMatrix& x);

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct SplitProblem {
  std::span<const SortedFeature> features;
  std::span<const int> node_of_row;  // -1: row not in any splittable node
  std::span<const double> grad;
  std::span<const double> hess;
  std::span<const double> node_grad;  // per-node totals
  std::span<const double> node_hess;
  double l2 = 1.0;
  double min_child_hessian = 1.0;
};

// Exact greedy search: best (gain, feature, threshold) per node. Ties keep the
// lowest feature index and, within a feature, the lowest threshold.
void find_best_splits_serial(const SplitProblem& problem, std::span<SplitCandidate> best);
void find_best_splits_omp(const SplitProblem& problem, std::span<SplitCandidate> best);

// ---- prediction -------------------------------------------------------------

// out[i] = base + sum_t tree_t(x_i)
void predict_margin_serial(std::span<const Tree> trees, double base, const FeatureMatrix& x,
                           std::span<double> out);
void predict_margin_omp(std::span<const Tree> trees, double base, const FeatureMatrix& x,
                        std::span<double> out);

// ---- bootstrap AUC ----------------------------------------------------------

// Replicate b resamples n rows with Rng(derive_seed(seed, "auc-bootstrap", b)).
// Replicates lacking one of the classes come back as NaN.
// Serial reference: materialise the resample and run the sort-based AUC.
// OpenMP version: one sort up front, then an O(n) weighted tie-group sweep
// per replicate.
std::vector<double> bootstrap_auc_serial(std::span<const double> scores, std::span<const int> labels,
                                         std::size_t replicates, std::uint64_t seed);
std::vector<double> bootstrap_auc_omp(std::span<const double> scores, std::span<const int> labels,
                                      std::size_t replicates, std::uint64_t seed);

}  // namespace fairworld::kernels
