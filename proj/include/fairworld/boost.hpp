#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/dataset.hpp"
#include "fairworld/tree.hpp"

namespace fairworld {

struct BoostParams {
  double eta = 0.1;               // learning rate
  int depth = 3;                  // max tree depth
  int rounds = 200;
  double lambda_fair = 0.0;       // weight of the demographic-parity penalty
  double min_leaf_weight = 1.0;   // L2 term in leaf = -G / (H + min_leaf_weight)
  double min_child_hessian = 1.0;
  double subsample = 1.0;         // row fraction per tree; < 1 draws from `seed`
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

nlohmann::json to_json(const BoostParams& p);
BoostParams boost_params_from_json(const nlohmann::json& j, const BoostParams& defaults = {});

struct BoostModel {
  std::vector<Tree> trees;
  double base_score = 0.0;  // log-odds
  std::vector<std::string> feature_names;

  bool operator==(const BoostModel&) const = default;
};

FeatureMatrix feature_matrix(const Dataset& ds, const std::vector<std::string>& names);

// Optional per-round trace of the training objective.
struct TrainTrace {
  std::vector<double> risk;       // R_reg after each round (index 0: before the first tree)
  std::vector<double> disparity;  // C on the training predictions, same indexing
};

// Second-order boosting on the penalised objective. Features are every
// non-target column of `train` (the PA included).
BoostModel train(const Dataset& train, const BoostParams& params, TrainTrace* trace = nullptr);

std::vector<double> predict_margin(const BoostModel& model, const Dataset& ds);
std::vector<double> predict_proba(const BoostModel& model, const Dataset& ds);
std::vector<double> predict_proba(const BoostModel& model, const FeatureMatrix& x);

nlohmann::json model_to_json(const BoostModel& model);
BoostModel model_from_json(const nlohmann::json& j);

struct SearchSpace {
  int depth_min = 2;
  int depth_max = 8;
  double eta_min = 0.01;
  double eta_max = 0.3;
};

struct TuneTrial {
  int depth = 0;
  double eta = 0.0;
  double cv_auc = 0.0;
};

struct TuneResult {
  int depth = 0;
  double eta = 0.0;
  double cv_auc = 0.0;
  std::vector<TuneTrial> trials;
};

// Draws the (depth, eta) candidates: depth uniform on the integer range, eta
// log-uniform. Exposed so tests can re-evaluate the same candidate set.
std::vector<std::pair<int, double>> sample_search_space(const SearchSpace& space, int budget, std::uint64_t seed);

// Fold id per row (0..folds-1), balanced, seeded.
std::vector<int> fold_assignment(std::size_t n_rows, int folds, std::uint64_t seed);

// Random search with k-fold CV at lambda_fair = 0; picks the highest mean
// validation AUC (first sampled wins ties).
TuneResult tune(const Dataset& train, const SearchSpace& space, int budget, int folds, std::uint64_t seed,
                const BoostParams& base = {});

}  // namespace fairworld
