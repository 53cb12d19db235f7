#include "fairworld/boost.hpp"

#include <algorithm>
#include <cmath>

#include "fairworld/error.hpp"
#include "fairworld/kernels.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/objective.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

void BoostParams::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("boost.eta must lie in (0, 1]");
  if (depth < 1) throw ConfigError("boost.depth must be >= 1");
  if (rounds < 1) throw ConfigError("boost.rounds must be >= 1");
  if (!(lambda_fair >= 0.0) || !std::isfinite(lambda_fair)) throw ConfigError("boost.lambda_fair must be >= 0");
  if (!(min_leaf_weight >= 0.0)) throw ConfigError("boost.min_leaf_weight must be >= 0");
  if (!(min_child_hessian >= 0.0)) throw ConfigError("boost.min_child_hessian must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("boost.subsample must lie in (0, 1]");
}

nlohmann::json to_json(const BoostParams& p) {
  return {{"eta", p.eta},
          {"depth", p.depth},
          {"rounds", p.rounds},
          {"lambda_fair", p.lambda_fair},
          {"min_leaf_weight", p.min_leaf_weight},
          {"min_child_hessian", p.min_child_hessian},
          {"subsample", p.subsample},
          {"seed", p.seed}};
}

BoostParams boost_params_from_json(const nlohmann::json& j, const BoostParams& defaults) {
  BoostParams p = defaults;
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
      field = j[key].get<std::remove_reference_t<decltype(field)>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("boost.") + key + " has the wrong type");
    }
  };
  read("eta", p.eta);
  read("depth", p.depth);
  read("rounds", p.rounds);
  read("lambda_fair", p.lambda_fair);
  read("min_leaf_weight", p.min_leaf_weight);
  read("min_child_hessian", p.min_child_hessian);
  read("subsample", p.subsample);
  read("seed", p.seed);
  p.validate();
  return p;
}

FeatureMatrix feature_matrix(const Dataset& ds, const std::vector<std::string>& names) {
  FeatureMatrix x(ds.n_rows(), names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (!ds.has_column(names[j])) throw SchemaMismatch("dataset lacks model feature '" + names[j] + "'");
    const auto v = ds.values(names[j]);
    std::copy(v.begin(), v.end(), x.data.begin() + static_cast<std::ptrdiff_t>(j * ds.n_rows()));
  }
  return x;
}

namespace {

// Grows one tree level by level; returns the leaf node id of every active row
// (-1 for inactive rows).
Tree grow_tree(const FeatureMatrix& x, std::span<const kernels::SortedFeature> sorted,
               std::span<const double> grad, std::span<const double> hess, std::vector<int> node_of_row,
               const BoostParams& params, std::vector<int>& leaf_of_row) {
  const std::size_t n = x.n_rows;
  Tree tree;
  tree.nodes.emplace_back();
  std::vector<int> level{0};
  leaf_of_row.assign(n, -1);

  for (int depth = 0; !level.empty(); ++depth) {
    const std::size_t m = level.size();
    std::vector<double> g(m, 0.0), h(m, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const int k = node_of_row[r];
      if (k < 0) continue;
      g[static_cast<std::size_t>(k)] += grad[r];
      h[static_cast<std::size_t>(k)] += hess[r];
    }

    std::vector<kernels::SplitCandidate> best(m);
    if (depth < params.depth) {
      kernels::SplitProblem problem{sorted, node_of_row, grad, hess, g, h, params.min_leaf_weight,
                                    params.min_child_hessian};
      kernels::find_best_splits_omp(problem, best);
    }

    std::vector<int> next;
    std::vector<int> left_slot(m, -1);
    for (std::size_t k = 0; k < m; ++k) {
      const auto id = static_cast<std::size_t>(level[k]);
      if (best[k].feature >= 0 && best[k].gain > 1e-12) {
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& nd = tree.nodes[id];
        nd.feature = best[k].feature;
        nd.threshold = best[k].threshold;
        nd.left = left;
        nd.right = left + 1;
        left_slot[k] = static_cast<int>(next.size());
        next.push_back(left);
        next.push_back(left + 1);
      } else {
        tree.nodes[id].value = -params.eta * g[k] / (h[k] + params.min_leaf_weight);
      }
    }

    for (std::size_t r = 0; r < n; ++r) {
      const int k = node_of_row[r];
      if (k < 0) continue;
      const auto ku = static_cast<std::size_t>(k);
      const auto& nd = tree.nodes[static_cast<std::size_t>(level[ku])];
      if (nd.is_leaf()) {
        leaf_of_row[r] = level[ku];
        node_of_row[r] = -1;
      } else {
        const bool go_left = x(r, static_cast<std::size_t>(nd.feature)) <= nd.threshold;
        node_of_row[r] = left_slot[ku] + (go_left ? 0 : 1);
      }
    }
    level = std::move(next);
  }
  return tree;
}

double sigmoid(double f) { return 1.0 / (1.0 + std::exp(-f)); }

}  // namespace

BoostModel train(const Dataset& data, const BoostParams& params, TrainTrace* trace) {
  params.validate();
  const auto labels = data.labels();
  const auto groups = data.groups();
  const std::size_t n = data.n_rows();
  if (n == 0) throw DegenerateTarget("training set is empty");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == n) throw DegenerateTarget("training target has a single class");
  if (params.lambda_fair > 0.0) {
    const auto protected_rows = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), 1));
    if (protected_rows == 0 || protected_rows == n) {
      throw EmptyGroup("fairness penalty needs both protected-attribute groups in the training set");
    }
  }

  BoostModel model;
  model.feature_names = data.feature_names();
  const auto x = feature_matrix(data, model.feature_names);
  const auto sorted = kernels::presort(x);
  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(rate / (1.0 - rate));

  std::vector<double> scores(n, model.base_score);
  std::vector<int> leaf_of_row;
  Rng row_rng(derive_seed(params.seed, "boost-subsample"));
  if (trace) {
    trace->risk.clear();
    trace->disparity.clear();
  }

  for (int round = 0; round < params.rounds; ++round) {
    const auto state = objective_state(scores, groups);
    if (trace) {
      trace->risk.push_back(regularized_risk(scores, labels, groups, params.lambda_fair));
      trace->disparity.push_back(std::abs(state.disparity()));
    }
    const auto gh = objective_grad(state, labels, groups, params.lambda_fair);

    std::vector<int> node_of_row(n, 0);
    if (params.subsample < 1.0) {
      for (auto& k : node_of_row) k = row_rng.uniform() < params.subsample ? 0 : -1;
    }
    const bool sampled = params.subsample < 1.0;
    auto tree = grow_tree(x, sorted, gh.grad, gh.hess, std::move(node_of_row), params, leaf_of_row);
    for (std::size_t r = 0; r < n; ++r) {
      if (leaf_of_row[r] >= 0) {
        scores[r] += tree.nodes[static_cast<std::size_t>(leaf_of_row[r])].value;
      } else if (sampled) {
        scores[r] += tree.eval([&](std::size_t j) { return x(r, j); });
      }
    }
    model.trees.push_back(std::move(tree));
  }
  if (trace) {
    const auto state = objective_state(scores, groups);
    trace->risk.push_back(regularized_risk(scores, labels, groups, params.lambda_fair));
    trace->disparity.push_back(std::abs(state.disparity()));
  }
  return model;
}

std::vector<double> predict_margin(const BoostModel& model, const Dataset& ds) {
  const auto x = feature_matrix(ds, model.feature_names);
  std::vector<double> out(x.n_rows);
  kernels::predict_margin_omp(model.trees, model.base_score, x, out);
  return out;
}

std::vector<double> predict_proba(const BoostModel& model, const FeatureMatrix& x) {
  if (x.n_cols != model.feature_names.size()) {
    throw SchemaMismatch("feature matrix has " + std::to_string(x.n_cols) + " columns, model expects " +
                         std::to_string(model.feature_names.size()));
  }
  std::vector<double> out(x.n_rows);
  kernels::predict_margin_omp(model.trees, model.base_score, x, out);
  for (auto& v : out) v = sigmoid(v);
  return out;
}

std::vector<double> predict_proba(const BoostModel& model, const Dataset& ds) {
  return predict_proba(model, feature_matrix(ds, model.feature_names));
}

nlohmann::json model_to_json(const BoostModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const auto& nd = t.nodes[i];
      if (nd.is_leaf()) {
        nodes.push_back({{"id", i}, {"leaf", nd.value}});
      } else {
        nodes.push_back({{"id", i},
                         {"feature", model.feature_names.at(static_cast<std::size_t>(nd.feature))},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right}});
      }
    }
    trees.push_back({{"nodes", nodes}});
  }
  return {{"base_score", model.base_score}, {"features", model.feature_names}, {"trees", trees}};
}

BoostModel model_from_json(const nlohmann::json& j) {
  BoostModel m;
  try {
    m.base_score = j.at("base_score").get<double>();
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode nd;
        if (jn.contains("leaf")) {
          nd.value = jn.at("leaf").get<double>();
        } else {
          const auto name = jn.at("feature").get<std::string>();
          const auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
          if (it == m.feature_names.end()) throw SchemaMismatch("tree references unknown feature '" + name + "'");
          nd.feature = static_cast<int>(it - m.feature_names.begin());
          nd.threshold = jn.at("threshold").get<double>();
          nd.left = jn.at("left").get<int>();
          nd.right = jn.at("right").get<int>();
        }
        t.nodes.push_back(nd);
      }
      m.trees.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("malformed model document: ") + e.what());
  }
  return m;
}

std::vector<std::pair<int, double>> sample_search_space(const SearchSpace& space, int budget, std::uint64_t seed) {
  if (budget < 1) throw ConfigError("tuning.budget must be >= 1");
  if (space.depth_min < 1 || space.depth_max < space.depth_min) throw ConfigError("tuning depth range is invalid");
  if (!(space.eta_min > 0.0 && space.eta_max >= space.eta_min && space.eta_max <= 1.0)) {
    throw ConfigError("tuning eta range is invalid");
  }
  Rng rng(derive_seed(seed, "random-search"));
  std::vector<std::pair<int, double>> out;
  const auto span = static_cast<std::uint64_t>(space.depth_max - space.depth_min + 1);
  for (int b = 0; b < budget; ++b) {
    const int depth = space.depth_min + static_cast<int>(rng.below(span));
    const double eta = std::exp(rng.uniform(std::log(space.eta_min), std::log(space.eta_max)));
    out.emplace_back(depth, eta);
  }
  return out;
}

std::vector<int> fold_assignment(std::size_t n_rows, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("tuning.folds must be >= 2");
  std::vector<std::size_t> perm(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) perm[i] = i;
  Rng rng(derive_seed(seed, "cv-folds"));
  rng.shuffle(perm.begin(), perm.end());
  std::vector<int> fold(n_rows);
  for (std::size_t k = 0; k < n_rows; ++k) fold[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return fold;
}

TuneResult tune(const Dataset& data, const SearchSpace& space, int budget, int folds, std::uint64_t seed,
                const BoostParams& base) {
  const auto candidates = sample_search_space(space, budget, seed);
  const auto fold = fold_assignment(data.n_rows(), folds, seed);
  std::vector<Dataset> fit_parts, val_parts;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit_rows, val_rows;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? val_rows : fit_rows).push_back(i);
    fit_parts.push_back(data.take_rows(fit_rows));
    val_parts.push_back(data.take_rows(val_rows));
  }

  const std::size_t jobs = candidates.size() * static_cast<std::size_t>(folds);
  std::vector<double> fold_auc(jobs, 0.0);
  std::vector<std::string> failure(jobs);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(jobs); ++jj) {
    const auto job = static_cast<std::size_t>(jj);
    const auto c = job / static_cast<std::size_t>(folds);
    const auto f = job % static_cast<std::size_t>(folds);
    try {
      BoostParams p = base;
      p.depth = candidates[c].first;
      p.eta = candidates[c].second;
      p.lambda_fair = 0.0;
      const auto model = train(fit_parts[f], p);
      fold_auc[job] = auc(predict_proba(model, val_parts[f]), val_parts[f].labels());
    } catch (const std::exception& e) {
      failure[job] = e.what();
    }
  }
  for (const auto& msg : failure) {
    if (!msg.empty()) throw DegenerateTarget("cross-validation fold failed: " + msg);
  }

  TuneResult result;
  result.cv_auc = -1.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double mean = 0.0;
    for (int f = 0; f < folds; ++f) mean += fold_auc[c * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f)];
    mean /= folds;
    result.trials.push_back({candidates[c].first, candidates[c].second, mean});
    if (mean > result.cv_auc) {
      result.cv_auc = mean;
      result.depth = candidates[c].first;
      result.eta = candidates[c].second;
    }
  }
  return result;
}

}  // namespace fairworld
