#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/boost.hpp"
#include "fairworld/dataset.hpp"
#include "fairworld/metrics.hpp"

namespace fairworld {

struct LambdaSearchOptions {
  double eps = 0.01;
  // 0 plus a 1-2-5 series from 1e-2 to 1e5.
  std::vector<double> grid = {0.0, 1e-2, 2e-2, 5e-2, 1e-1, 2e-1, 5e-1, 1.0, 2.0, 5.0, 1e1, 2e1, 5e1,
                              1e2, 2e2, 5e2, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5};
  int refine_steps = 1;  // bisections inside the bracketing grid pair
};

struct LambdaEvaluation {
  double lambda = 0.0;
  double disparity = 0.0;  // C on the test predictions
};

struct LambdaStarResult {
  double lambda_star = 0.0;
  double achieved_disparity = 0.0;
  bool satisfied = false;                 // false: grid exhausted, lambda_star is the best achieved
  std::vector<LambdaEvaluation> evaluated;  // in evaluation order
};

// Walks the grid in ascending order, training one model per value until the
// test disparity drops below eps, then bisects between that value and its
// predecessor `refine_steps` times (geometric midpoint, arithmetic when the
// lower end is 0). Never throws GridExhausted; see `satisfied`.
LambdaStarResult search_lambda_star(const Dataset& train, const Dataset& test, const BoostParams& params,
                                    const LambdaSearchOptions& opts = {});

// As search_lambda_star, but throws GridExhausted (message carries the best
// achieved disparity) when no value satisfies the bound.
LambdaStarResult find_lambda_star(const Dataset& train, const Dataset& test, const BoostParams& params,
                                  const LambdaSearchOptions& opts = {});

struct CurvePoint {
  double w = 0.0;
  double lambda = 0.0;
  double fairness = 0.0;  // 1 - C on the world's test set
  double auc = 0.0;
  Interval auc_ci;
};

struct TradeoffCurve {
  std::string world;
  std::vector<CurvePoint> points;  // ordered by w
};

struct CurveOptions {
  int steps = 9;  // S: S + 2 models at w = n / (S + 1)
  double ci_level = 0.95;
  std::size_t bootstrap_replicates = 1000;
  std::uint64_t bootstrap_seed = 0;
};

using NamedDataset = std::pair<std::string, Dataset>;

// One model per w trained on `train` at lambda = w * lambda_star, each
// evaluated on every test world.
std::vector<TradeoffCurve> tradeoff_curve(const Dataset& train, const std::vector<NamedDataset>& test_worlds,
                                          double lambda_star, const BoostParams& params,
                                          const CurveOptions& opts = {});

enum class Relation { Aligned, Tradeoff, Flat };
std::string to_string(Relation r);
Relation relation_from_string(const std::string& s);

struct RelationResult {
  Relation relation = Relation::Flat;
  double rho = 0.0;  // NaN when fairness or AUC is constant along the curve
};

// Spearman rho(fairness, auc): aligned if rho >= 0.5, tradeoff if rho <= -0.5,
// flat otherwise (including undefined rho). Throws TooFewPoints below 3 points.
RelationResult relation_direction(const TradeoffCurve& curve);

std::string curves_csv_header();
std::string curve_csv_rows(const TradeoffCurve& curve, const std::string& prefix_columns = "");
nlohmann::json to_json(const TradeoffCurve& curve);
nlohmann::json to_json(const LambdaStarResult& r);

}  // namespace fairworld
