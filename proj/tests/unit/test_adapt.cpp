#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "fairworld/adapt.hpp"
#include "fairworld/error.hpp"
#include "fairworld/graph.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/scm.hpp"

using namespace fairworld;

namespace {

std::vector<double> group_values(const Dataset& ds, const std::string& col, int group) {
  std::vector<double> out;
  const auto v = ds.values(col);
  const auto g = ds.groups();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (g[i] == group) out.push_back(v[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("three-row stratum table falls back to the nearest populated cell") {
  // One binary parent. Group 0 only has parent = 0, group 1 only parent = 1.
  const std::vector<double> parent{0, 0, 0, 1, 1, 1};
  const std::vector<double> y{1.0, 2.0, 3.0, 10.0, 20.0, 30.0};
  const std::array<std::vector<std::size_t>, 2> rows{std::vector<std::size_t>{0, 1, 2}, std::vector<std::size_t>{3, 4, 5}};
  const auto est = StrataEstimator::fit({std::span<const double>(parent)}, {true}, y, false, rows, 10, 1);
  bool fallback = false;
  const auto& own = est.lookup(0, {0}, fallback);
  CHECK(!fallback);
  CHECK(own.rows == 3);
  const auto& near = est.lookup(0, {1}, fallback);
  CHECK(fallback);
  CHECK(near.rows == 3);
  CHECK(near.distribution.quantile(0.5) == doctest::Approx(2.0));
  fallback = false;
  est.lookup(1, {1}, fallback);
  CHECK(!fallback);
  // A minimum above every stratum size still returns a populated stratum.
  const auto strict = StrataEstimator::fit({std::span<const double>(parent)}, {true}, y, false, rows, 10, 5);
  CHECK(strict.lookup(1, {1}, fallback).rows == 3);
  CHECK(fallback);
}

TEST_CASE("continuous parents are cut at deciles") {
  std::vector<double> parent(1000), y(1000);
  std::array<std::vector<std::size_t>, 2> rows;
  for (std::size_t i = 0; i < 1000; ++i) {
    parent[i] = static_cast<double>(i);
    y[i] = static_cast<double>(i % 7);
    rows[i % 2].push_back(i);
  }
  const auto est = StrataEstimator::fit({std::span<const double>(parent)}, {false}, y, false, rows, 10, 5);
  const std::vector<double> lo{0.0}, mid{550.0}, hi{999.0};
  CHECK(est.cell(lo)[0] == 0);
  CHECK(est.cell(mid)[0] == 5);
  CHECK(est.cell(hi)[0] == 9);
  CHECK(StrataEstimator::from_json(est.to_json()).cell(mid) == est.cell(mid));
}

TEST_CASE("adaptation of the default DGP") {
  const auto spec = default_credit_scm();
  const auto [real, find] = paired_worlds(spec, 20000, 6);
  const auto model = adapt_fit(real, adjacency_from_scm(spec), {kReferenceGroup, 10, 5, 2});
  AdaptDiagnostics diag;
  const auto adapted = adapt_apply(model, real, &diag);
  CHECK(diag.rows_adapted == group_values(real, "Y", 1).size());
  for (const auto& c : real.columns()) CHECK(group_values(adapted, c.name, 0) == group_values(real, c.name, 0));
  CHECK(adapted.values("A").size() == real.values("A").size());
  CHECK(group_values(adapted, "X_C", 1) == group_values(real, "X_C", 1));
  CHECK(base_rate_gap(adapted) < 0.03);
  const auto moved = group_values(adapted, "X_A", 1), target = group_values(find, "X_A", 1);
  CHECK(oracle::ks(moved, target) < ks_critical(moved.size(), target.size(), 0.01));
  // X_A has one continuous parent; within a stratum the map is monotone, so ranks
  // are kept up to stratum boundaries.
  CHECK(spearman(group_values(real, "X_A", 1), moved) > 0.95);

  const auto back = adapt_model_from_json(nlohmann::json::parse(to_json(model).dump()));
  CHECK(adapt_apply(back, real) == adapted);
}

TEST_CASE("adapt errors") {
  const auto spec = default_credit_scm();
  const auto real = simulate(spec, WorldKind::Real, 300, 1);
  const auto one = real.with_values("A", std::vector<double>(300, 1.0));
  CHECK_THROWS_AS(adapt_fit(one, adjacency_from_scm(spec)), DegenerateGroup);
  const auto model = adapt_fit(real, adjacency_from_scm(spec));
  const auto other = Dataset({{"A", ColumnKind::Binary, {0, 1}}, {"Y", ColumnKind::Binary, {0, 1}}}, "A", "Y");
  CHECK_THROWS_AS(adapt_apply(model, other), SchemaMismatch);
}
