#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/fixtures.hpp"
#include "fairworld/boost.hpp"
#include "fairworld/error.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/objective.hpp"
#include "fairworld/scm.hpp"

using namespace fairworld;

namespace {

Dataset step_data(std::size_t n) {
  std::vector<double> a(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i % 2;
    x[i] = static_cast<double>(i % 100);
    y[i] = x[i] >= 50.0;
  }
  return Dataset({{"A", ColumnKind::Binary, a}, {"X", ColumnKind::Numeric, x}, {"Y", ColumnKind::Binary, y}}, "A",
                 "Y");
}

}  // namespace

TEST_CASE("parameter validation") {
  BoostParams p;
  CHECK_NOTHROW(p.validate());
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.depth = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.lambda_fair = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.subsample = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(boost_params_from_json(nlohmann::json{{"eta", "fast"}}), ConfigError);
  const auto q = boost_params_from_json(nlohmann::json{{"eta", 0.05}, {"depth", 5}});
  CHECK(q.eta == 0.05);
  CHECK(q.depth == 5);
  CHECK(boost_params_from_json(to_json(q)).rounds == q.rounds);
}

TEST_CASE("a step function is learned by one split") {
  const auto ds = step_data(1000);
  BoostParams p;
  p.depth = 1;
  p.rounds = 50;
  p.eta = 0.3;
  const auto model = train(ds, p);
  CHECK(model.trees.size() == 50);
  CHECK(model.trees[0].nodes[0].threshold == 49.5);
  const auto probs = predict_proba(model, ds);
  const auto y = ds.labels();
  for (std::size_t i = 0; i < y.size(); ++i) CHECK((probs[i] > 0.5) == (y[i] == 1));
  CHECK(auc(probs, y) == 1.0);
}

TEST_CASE("training is deterministic and the model serialises exactly") {
  const auto ds = fixtures::small_dataset(600, 2);
  BoostParams p;
  p.rounds = 20;
  p.subsample = 0.7;
  p.seed = 3;
  const auto m1 = train(ds, p);
  const auto m2 = train(ds, p);
  CHECK(m1 == m2);
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(m1).dump()));
  CHECK(back == m1);
  CHECK(predict_proba(back, ds) == predict_proba(m1, ds));
  p.seed = 4;
  CHECK(!(train(ds, p) == m1));
}

TEST_CASE("base score is the log-odds of the base rate") {
  const auto ds = fixtures::small_dataset(400, 5);
  const auto y = ds.labels();
  double rate = 0.0;
  for (int v : y) rate += v;
  rate /= static_cast<double>(y.size());
  BoostParams p;
  p.rounds = 1;
  CHECK(train(ds, p).base_score == doctest::Approx(std::log(rate / (1.0 - rate))));
}

TEST_CASE("the fairness penalty shrinks the training disparity") {
  const auto ds = simulate(default_credit_scm(), WorldKind::Real, 3000, 8);
  BoostParams p;
  p.rounds = 100;
  p.eta = 0.1;
  const auto free_model = train(ds, p);
  p.lambda_fair = 500.0;
  const auto fair_model = train(ds, p);
  const auto g = ds.groups();
  const double c0 = disparity(predict_proba(free_model, ds), g);
  const double c1 = disparity(predict_proba(fair_model, ds), g);
  CHECK(c0 > 0.1);
  CHECK(c1 < 0.5 * c0);
}

TEST_CASE("degenerate inputs") {
  auto ds = step_data(100);
  ds = ds.with_values("Y", std::vector<double>(100, 1.0));
  CHECK_THROWS_AS(train(ds, {}), DegenerateTarget);
  auto one_group = step_data(100).with_values("A", std::vector<double>(100, 0.0));
  BoostParams p;
  p.lambda_fair = 1.0;
  CHECK_THROWS_AS(train(one_group, p), EmptyGroup);
  p.lambda_fair = 0.0;
  CHECK_NOTHROW(train(one_group, p));
  const auto model = train(step_data(100), {});
  const auto other = Dataset({{"A", ColumnKind::Binary, {0, 1}}, {"Y", ColumnKind::Binary, {0, 1}}}, "A", "Y");
  CHECK_THROWS_AS(predict_proba(model, other), SchemaMismatch);
}

TEST_CASE("search space sampling and folds") {
  SearchSpace s{2, 4, 0.01, 0.3};
  const auto c = sample_search_space(s, 200, 1);
  REQUIRE(c.size() == 200);
  bool saw_lo = false, saw_hi = false;
  for (const auto& [d, e] : c) {
    CHECK(d >= 2);
    CHECK(d <= 4);
    CHECK(e >= 0.01);
    CHECK(e <= 0.3);
    saw_lo |= d == 2;
    saw_hi |= d == 4;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK(sample_search_space(s, 20, 1) == sample_search_space(s, 20, 1));

  const auto folds = fold_assignment(100, 3, 7);
  int count[3] = {0, 0, 0};
  for (int f : folds) ++count[f];
  CHECK(count[0] == 34);
  CHECK(count[1] == 33);
  CHECK(count[2] == 33);
}

TEST_CASE("tuning picks the best mean CV AUC among its trials") {
  const auto ds = fixtures::small_dataset(600, 9);
  BoostParams base;
  base.rounds = 20;
  const auto r = tune(ds, {1, 3, 0.05, 0.3}, 4, 3, 11, base);
  REQUIRE(r.trials.size() == 4);
  double best = 0.0;
  for (const auto& t : r.trials) best = std::max(best, t.cv_auc);
  CHECK(r.cv_auc == best);
  const auto again = tune(ds, {1, 3, 0.05, 0.3}, 4, 3, 11, base);
  CHECK(again.depth == r.depth);
  CHECK(again.eta == r.eta);
}
