#include <doctest.h>

#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "fairworld/error.hpp"
#include "fairworld/graph.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/scm.hpp"
#include "fairworld/warp.hpp"

using namespace fairworld;

namespace {

// A -> X -> Y with X | A ~ Gamma(shape 4, scale 2 (a') or 3 (a)).
Dataset gamma_toy(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i % 2;
    std::gamma_distribution<double> gx(4.0, a[i] == 1 ? 3.0 : 2.0);
    x[i] = gx(gen);
    y[i] = u(gen) < 1.0 / (1.0 + std::exp(-(x[i] - 9.0) / 3.0));
  }
  return Dataset({{"A", ColumnKind::Binary, a}, {"X", ColumnKind::Numeric, x}, {"Y", ColumnKind::Binary, y}}, "A",
                 "Y");
}

AdjacencyInfo toy_dag() {
  return adjacency_from_json(nlohmann::json::parse(R"({"protected": "A", "target": "Y", "nodes": [
    {"name": "A", "parents": []}, {"name": "X", "parents": ["A"]}, {"name": "Y", "parents": ["A", "X"]}]})"));
}

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

TEST_CASE("binary rank convention") {
  CHECK(binary_rank(1, 0.3, 0.0) == doctest::Approx(0.7));
  CHECK(binary_rank(1, 0.3, 1.0) == doctest::Approx(1.0));
  CHECK(binary_rank(0, 0.3, 0.5) == doctest::Approx(0.35));
}

TEST_CASE("two-Gamma toy: warped a matches a' and the closed-form quantile map") {
  const auto ds = gamma_toy(10000, 1);
  const auto model = warp_fit(ds, toy_dag(), {kProtectedGroup, 3});
  REQUIRE(model.nodes.size() == 2);
  CHECK(model.nodes[0].node == "X");
  CHECK(model.nodes[0].residual == ResidualKind::Ratio);
  CHECK(model.nodes[1].binary);
  const auto warped = warp_apply(model, ds);

  const auto before = group_values(ds, "X", 1), after = group_values(warped, "X", 1), ref = group_values(ds, "X", 0);
  CHECK(oracle::ks(after, ref) < ks_critical(after.size(), ref.size(), 0.01));
  CHECK(oracle::ks(before, ref) > ks_critical(before.size(), ref.size(), 0.01));

  // Exact map between Gamma(4, 3) and Gamma(4, 2) is x -> 2x/3.
  const boost::math::gamma_distribution<double> ref_dist(4.0, 2.0);
  double dev = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) dev += std::abs(after[i] - before[i] * 2.0 / 3.0);
  dev /= static_cast<double>(before.size());
  CHECK(dev / boost::math::standard_deviation(ref_dist) < 0.05);

  CHECK(oracle::spearman(before, after) == doctest::Approx(1.0));
  CHECK(group_values(warped, "X", 0) == ref);
  CHECK(group_values(warped, "Y", 0) == group_values(ds, "Y", 0));
}

TEST_CASE("warping the default DGP keeps ranks and equalises base rates") {
  const auto [real, find] = paired_worlds(default_credit_scm(), 20000, 2);
  const auto model = warp_fit(real, adjacency_from_scm(default_credit_scm()), {kProtectedGroup, 4});
  const auto warped = warp_apply(model, real);
  CHECK(spearman(group_values(real, "X_A", 1), group_values(warped, "X_A", 1)) == doctest::Approx(1.0));
  CHECK(group_values(warped, "X_C", 1) == group_values(real, "X_C", 1));
  CHECK(base_rate_gap(real) > 0.1);
  CHECK(base_rate_gap(warped) < 0.03);
  // Warped protected rows should look like their FiND counterparts in distribution.
  CHECK(oracle::ks(group_values(warped, "X_A", 1), group_values(find, "X_A", 1)) <
        ks_critical(10000, 10000, 0.01));
}

TEST_CASE("reverse direction moves a' onto a") {
  const auto ds = gamma_toy(6000, 5);
  const auto model = warp_fit(ds, toy_dag(), {kReferenceGroup, 1});
  CHECK(model.target_group() == kProtectedGroup);
  const auto warped = warp_apply(model, ds);
  CHECK(group_values(warped, "X", 1) == group_values(ds, "X", 1));
  const auto moved = group_values(warped, "X", 0), target = group_values(ds, "X", 1);
  CHECK(oracle::ks(moved, target) < ks_critical(moved.size(), target.size(), 0.01));
}

TEST_CASE("warp model serialises and checks the schema") {
  const auto ds = gamma_toy(2000, 7);
  const auto model = warp_fit(ds, toy_dag(), {kProtectedGroup, 9});
  const auto back = warp_model_from_json(nlohmann::json::parse(to_json(model).dump()));
  CHECK(warp_apply(back, ds) == warp_apply(model, ds));
  CHECK(to_json(model)["method"] == "warp");
  const auto other = Dataset({{"A", ColumnKind::Binary, {0, 1}}, {"Y", ColumnKind::Binary, {0, 1}}}, "A", "Y");
  CHECK_THROWS_AS(warp_apply(model, other), SchemaMismatch);
}

TEST_CASE("warp needs rows in both groups") {
  const auto ds = gamma_toy(200, 1).with_values("A", std::vector<double>(200, 0.0));
  CHECK_THROWS_AS(warp_fit(ds, toy_dag(), {}), DegenerateGroup);
}
