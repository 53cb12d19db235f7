#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "fairworld/error.hpp"
#include "fairworld/metrics.hpp"

using namespace fairworld;

TEST_CASE("eight-row panel worked by hand") {
  const std::vector<double> p{0.9, 0.6, 0.4, 0.2, 0.8, 0.7, 0.3, 0.1};
  const std::vector<int> y{1, 0, 1, 0, 1, 1, 0, 0};
  const std::vector<int> g{1, 1, 1, 1, 0, 0, 0, 0};
  const auto r = fairness_panel(p, y, g, {0.5, 0.95, 200, 1});
  CHECK(r.protected_cells.tp == 1);
  CHECK(r.protected_cells.fp == 1);
  CHECK(r.protected_cells.fn == 1);
  CHECK(r.protected_cells.tn == 1);
  CHECK(r.reference_cells.tp == 2);
  CHECK(r.reference_cells.tn == 2);
  CHECK(r.dp == doctest::Approx(1.0));
  CHECK(*r.fpr_balance == doctest::Approx(0.5));
  CHECK(*r.fnr_balance == doctest::Approx(0.5));
  CHECK(*r.ppv_parity == doctest::Approx(0.5));
  CHECK(r.auc == doctest::Approx(15.0 / 16.0));
  CHECK(r.base_rate_protected == 0.5);
  CHECK(r.base_rate_reference == 0.5);
  CHECK(r.auc_ci.lo <= r.auc);
  CHECK(r.auc_ci.hi >= r.auc);
  CHECK(r.undefined().empty());
}

TEST_CASE("threshold ties predict positive") {
  const std::vector<double> p{0.5, 0.49, 0.5, 0.49};
  const std::vector<int> y{1, 0, 1, 0};
  const std::vector<int> g{1, 1, 0, 0};
  const auto r = fairness_panel(p, y, g, {0.5, 0.95, 50, 1});
  CHECK(r.protected_cells.tp == 1);
  CHECK(r.protected_cells.tn == 1);
}

TEST_CASE("undefined rates are reported, not guessed") {
  // Group 1 has no predicted positives (PPV undefined) and no negatives (FPR undefined).
  const std::vector<double> p{0.1, 0.2, 0.9, 0.1};
  const std::vector<int> y{1, 1, 1, 0};
  const std::vector<int> g{1, 1, 0, 0};
  const auto r = fairness_panel(p, y, g, {0.5, 0.95, 50, 1});
  CHECK(!r.ppv_parity);
  CHECK(!r.fpr_balance);
  CHECK(r.fnr_balance);
  CHECK(r.undefined() == std::vector<std::string>{"fpr_balance", "ppv_parity"});
  const auto row = panel_csv_row("real", r);
  CHECK(row.find("NA") != std::string::npos);
  CHECK(to_json(r)["ppv_parity"].is_null());
}

TEST_CASE("panel errors") {
  const std::vector<double> p{0.1, 0.2};
  CHECK_THROWS_AS(fairness_panel(p, std::vector<int>{0, 1}, std::vector<int>{1, 1}), EmptyGroup);
  CHECK_THROWS_AS(fairness_panel(p, std::vector<int>{1, 1}, std::vector<int>{0, 1}), SingleClass);
  CHECK_THROWS_AS(disparity(p, std::vector<int>{0, 0}), EmptyGroup);
}

TEST_CASE("AUC equals the pair-count oracle with ties") {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> score(0, 6), len(2, 40);
  std::bernoulli_distribution coin(0.4);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = len(gen);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = score(gen) / 6.0;
      y[i] = coin(gen);
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(auc(s, y) == oracle::pair_auc(s, y));
  }
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), SingleClass);
}

TEST_CASE("disparity is the absolute gap of group means") {
  const std::vector<double> p{0.2, 0.4, 0.9, 0.7};
  const std::vector<int> g{0, 0, 1, 1};
  CHECK(disparity(p, g) == doctest::Approx(0.5));
}

TEST_CASE("bootstrap interval is seeded and narrows with n") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z(0.0, 1.0);
  auto draw = [&](std::size_t n) {
    std::pair<std::vector<double>, std::vector<int>> d;
    for (std::size_t i = 0; i < n; ++i) {
      const int y = i % 2;
      d.first.push_back(z(gen) + y);
      d.second.push_back(y);
    }
    return d;
  };
  const auto small = draw(200), large = draw(5000);
  const auto a = auc_ci(small.first, small.second, 0.95, 300, 4);
  const auto b = auc_ci(small.first, small.second, 0.95, 300, 4);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  const auto c = auc_ci(large.first, large.second, 0.95, 300, 4);
  CHECK(c.hi - c.lo < a.hi - a.lo);
  // Population AUC of N(1,1) vs N(0,1) is Phi(1/sqrt(2)) = 0.7602.
  CHECK(c.lo < 0.7602);
  CHECK(c.hi > 0.7602);
}

TEST_CASE("Spearman matches the rank oracle; constant input is undefined") {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> v(0, 5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(12), b(12);
    for (int i = 0; i < 12; ++i) {
      a[i] = v(gen);
      b[i] = v(gen) + 0.5 * a[i];
    }
    a[0] = 0;
    a[1] = 5;
    b[0] = 0;
    b[1] = 9;
    CHECK(spearman(a, b) == doctest::Approx(oracle::spearman(a, b)).epsilon(1e-12));
  }
  const std::vector<double> c{1, 1, 1}, d{1, 2, 3};
  CHECK(std::isnan(spearman(c, d)));
  CHECK(spearman(d, d) == doctest::Approx(1.0));
}

TEST_CASE("KS statistic matches the scan oracle") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> a(300), b(200);
  for (auto& x : a) x = std::round(z(gen) * 10.0) / 10.0;
  for (auto& x : b) x = std::round((z(gen) + 0.3) * 10.0) / 10.0;
  CHECK(ks_statistic(a, b) == doctest::Approx(oracle::ks(a, b)).epsilon(1e-12));
  // c(0.01) = sqrt(-ln(0.005) / 2) = 1.6276.
  CHECK(ks_critical(5000, 5000, 0.01) == doctest::Approx(1.6276 * std::sqrt(2.0 / 5000.0)).epsilon(1e-3));
}
