#include <doctest.h>

#include <cmath>
#include <random>

#include "fairworld/error.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/scm.hpp"
#include "fairworld/tradeoff.hpp"

using namespace fairworld;

namespace {

// Every (X, Y) row appears once in each group, so A carries no information:
// no split on A has positive gain and twins get identical predictions.
Dataset twins(std::size_t pairs, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a, x, y;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double xi = u(gen) * 4.0;
    const double yi = u(gen) < 1.0 / (1.0 + std::exp(-(xi - 2.0)));
    for (int g : {0, 1}) {
      a.push_back(g);
      x.push_back(xi);
      y.push_back(yi);
    }
  }
  return Dataset({{"A", ColumnKind::Binary, a}, {"X", ColumnKind::Numeric, x}, {"Y", ColumnKind::Binary, y}}, "A",
                 "Y");
}

// Y depends strongly on A.
Dataset biased(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i % 2;
    x[i] = u(gen) * 4.0 + a[i];
    y[i] = u(gen) < 1.0 / (1.0 + std::exp(-(x[i] - 2.5 + 1.5 * a[i])));
  }
  return Dataset({{"A", ColumnKind::Binary, a}, {"X", ColumnKind::Numeric, x}, {"Y", ColumnKind::Binary, y}}, "A",
                 "Y");
}

BoostParams small_params() {
  BoostParams p;
  p.rounds = 60;
  p.depth = 2;
  p.eta = 0.1;
  return p;
}

TradeoffCurve curve_of(const std::vector<double>& fairness, const std::vector<double>& auc) {
  TradeoffCurve c{"t", {}};
  for (std::size_t i = 0; i < fairness.size(); ++i) c.points.push_back({0.0, 0.0, fairness[i], auc[i], {}});
  return c;
}

}  // namespace

TEST_CASE("option validation") {
  const auto d = twins(50, 1);
  LambdaSearchOptions o;
  o.eps = 0.0;
  CHECK_THROWS_AS(search_lambda_star(d, d, small_params(), o), ConfigError);
  o = {};
  o.grid = {1.0, 0.5};
  CHECK_THROWS_AS(search_lambda_star(d, d, small_params(), o), ConfigError);
  o.grid = {};
  CHECK_THROWS_AS(search_lambda_star(d, d, small_params(), o), ConfigError);
}

TEST_CASE("no-information PA gives lambda* at the grid minimum") {
  const auto train_ds = twins(500, 2), test_ds = twins(200, 3);
  const auto r = find_lambda_star(train_ds, test_ds, small_params());
  CHECK(r.satisfied);
  CHECK(r.lambda_star == 0.0);
  CHECK(r.evaluated.size() == 1);
  CHECK(r.achieved_disparity < 1e-12);
}

TEST_CASE("lambda* is bracketed and refined") {
  const auto train_ds = biased(2000, 4), test_ds = biased(2000, 5);
  LambdaSearchOptions o;
  o.grid = {0.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0, 1500.0, 2000.0};
  o.refine_steps = 3;
  o.eps = 0.1;
  const auto r = search_lambda_star(train_ds, test_ds, small_params(), o);
  REQUIRE(r.satisfied);
  CHECK(r.achieved_disparity < o.eps);
  CHECK(r.lambda_star > 0.0);
  // The first grid hit and its predecessor bracket lambda*.
  double hit = 0.0, before = 0.0;
  for (std::size_t k = 0; k < o.grid.size(); ++k) {
    if (r.evaluated[k].disparity < o.eps) {
      hit = o.grid[k];
      before = o.grid[k - 1];
      CHECK(r.evaluated.size() == k + 1 + 3);
      break;
    }
  }
  CHECK(r.lambda_star <= hit);
  CHECK(r.lambda_star > before);
  for (const auto& e : r.evaluated) {
    if (e.lambda == r.lambda_star) CHECK(e.disparity == r.achieved_disparity);
  }
}

TEST_CASE("an exhausted grid reports the best lambda or throws") {
  const auto train_ds = biased(1000, 6), test_ds = biased(1000, 7);
  LambdaSearchOptions o;
  o.grid = {0.0, 0.001};
  const auto r = search_lambda_star(train_ds, test_ds, small_params(), o);
  CHECK(!r.satisfied);
  CHECK(r.evaluated.size() == 2);
  CHECK(r.achieved_disparity == std::min(r.evaluated[0].disparity, r.evaluated[1].disparity));
  CHECK_THROWS_AS(find_lambda_star(train_ds, test_ds, small_params(), o), GridExhausted);
}

TEST_CASE("curve layout and endpoints") {
  const auto train_ds = biased(1500, 8), test_ds = biased(800, 9), other = twins(400, 10);
  CurveOptions opts;
  opts.steps = 3;
  opts.bootstrap_replicates = 50;
  const auto curves = tradeoff_curve(train_ds, {{"real", test_ds}, {"twins", other}}, 200.0, small_params(), opts);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].world == "real");
  REQUIRE(curves[0].points.size() == 5);
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(curves[0].points[n].w == doctest::Approx(n / 4.0));
    CHECK(curves[0].points[n].lambda == doctest::Approx(50.0 * n));
    CHECK(curves[0].points[n].auc_ci.lo <= curves[0].points[n].auc);
  }
  auto p = small_params();
  const auto model = train(train_ds, p);
  const auto probs = predict_proba(model, test_ds);
  CHECK(curves[0].points[0].fairness == doctest::Approx(1.0 - disparity(probs, test_ds.groups())));
  CHECK(curves[0].points[0].auc == doctest::Approx(auc(probs, test_ds.labels())));
  // Fairness rises from w = 0 to w = 1 under a strong penalty.
  CHECK(curves[0].points.back().fairness > curves[0].points.front().fairness);
  const auto again = tradeoff_curve(train_ds, {{"real", test_ds}, {"twins", other}}, 200.0, small_params(), opts);
  CHECK(to_json(again[1]) == to_json(curves[1]));
  CHECK(curve_csv_rows(curves[0]).find("real,0,0,") == 0);
}

TEST_CASE("relation direction from Spearman rho") {
  CHECK(relation_direction(curve_of({0.8, 0.9, 0.95, 1.0}, {0.80, 0.82, 0.85, 0.9})).relation == Relation::Aligned);
  CHECK(relation_direction(curve_of({0.8, 0.9, 0.95, 1.0}, {0.9, 0.85, 0.82, 0.8})).relation == Relation::Tradeoff);
  CHECK(relation_direction(curve_of({0.8, 0.9, 0.95, 1.0}, {0.9, 0.8, 0.9, 0.8})).relation == Relation::Flat);
  const auto constant = relation_direction(curve_of({0.9, 0.9, 0.9}, {0.8, 0.81, 0.82}));
  CHECK(constant.relation == Relation::Flat);
  CHECK(std::isnan(constant.rho));
  CHECK_THROWS_AS(relation_direction(curve_of({0.9, 0.95}, {0.8, 0.9})), TooFewPoints);
  CHECK(relation_from_string(to_string(Relation::Tradeoff)) == Relation::Tradeoff);
}
