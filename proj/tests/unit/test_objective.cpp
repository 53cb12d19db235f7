#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "fairworld/boost.hpp"
#include "fairworld/error.hpp"
#include "fairworld/objective.hpp"

using namespace fairworld;

namespace {

struct Instance {
  std::vector<double> f;
  std::vector<int> y, g;
};

Instance random_instance(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    in.g.push_back(i < 2 ? static_cast<int>(i) : u(gen) < 0.5);
    in.f.push_back(-3.0 + 6.0 * u(gen) + 0.8 * in.g.back());
    in.y.push_back(u(gen) < 0.5);
  }
  return in;
}

}  // namespace

TEST_CASE("objective state reports group means") {
  const std::vector<double> f{0.0, 0.0, std::log(3.0), std::log(3.0)};
  const std::vector<int> g{0, 0, 1, 1};
  const auto s = objective_state(f, g);
  CHECK(s.n_reference == 2);
  CHECK(s.n_protected == 2);
  CHECK(s.mean_reference == doctest::Approx(0.5));
  CHECK(s.mean_protected == doctest::Approx(0.75));
  CHECK(s.disparity() == doctest::Approx(0.25));
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 gen(17);
  for (double lambda : {0.0, 0.1, 1.0, 10.0}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto in = random_instance(gen, 20 + 30 * rep);
      const auto state = objective_state(in.f, in.g);
      if (std::abs(state.disparity()) < 1e-3) continue;  // too close to the kink for differencing
      const auto gh = objective_grad(state, in.y, in.g, lambda);
      const auto fd = oracle::fd_gradient(in.f, in.y, in.g, lambda);
      CHECK(oracle::relative_error(gh.grad, fd) < 1e-4);
      for (std::size_t i = 0; i < in.f.size(); ++i) {
        CHECK(gh.hess[i] == doctest::Approx(oracle::fd_loss_curvature(in.f[i], in.y[i])).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("penalty gradient has the sign of the disparity") {
  // Group 1 above group 0: the penalty pushes group-1 scores down and group-0 scores up.
  const std::vector<double> f{-1.0, -1.0, 1.0, 1.0};
  const std::vector<int> g{0, 0, 1, 1}, y{0, 0, 0, 0};
  const auto s = objective_state(f, g);
  const auto plain = objective_grad(s, y, g, 0.0);
  const auto pen = objective_grad(s, y, g, 5.0);
  CHECK(pen.grad[2] > plain.grad[2]);
  CHECK(pen.grad[0] < plain.grad[0]);
  CHECK(pen.hess == plain.hess);
}

TEST_CASE("zero disparity gives the zero subgradient") {
  const std::vector<double> f{0.3, 0.3};
  const std::vector<int> g{0, 1}, y{1, 0};
  const auto s = objective_state(f, g);
  CHECK(objective_grad(s, y, g, 100.0).grad == objective_grad(s, y, g, 0.0).grad);
}

TEST_CASE("penalty requires both groups") {
  const std::vector<double> f{0.1, 0.2};
  const std::vector<int> g{0, 0}, y{1, 0};
  CHECK_THROWS_AS(objective_grad(objective_state(f, g), y, g, 1.0), EmptyGroup);
  CHECK_NOTHROW(objective_grad(objective_state(f, g), y, g, 0.0));
}

TEST_CASE("boosting decreases the unpenalised training risk every round") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 400;
  std::vector<double> a(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = u(gen) < 0.5;
    x[i] = u(gen) * 4.0;
    y[i] = u(gen) < 1.0 / (1.0 + std::exp(-(x[i] - 2.0 + a[i])));
  }
  const Dataset ds({{"A", ColumnKind::Binary, a}, {"X", ColumnKind::Numeric, x}, {"Y", ColumnKind::Binary, y}}, "A",
                   "Y");
  for (double lambda : {0.0, 0.5}) {
    BoostParams p;
    p.rounds = 30;
    p.lambda_fair = lambda;
    TrainTrace trace;
    train(ds, p, &trace);
    REQUIRE(trace.risk.size() == 31);
    for (std::size_t r = 1; r < trace.risk.size(); ++r) CHECK(trace.risk[r] <= trace.risk[r - 1] + 1e-9);
  }
}
