#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "fairworld/kernels.hpp"
#include "fairworld/metrics.hpp"

using namespace fairworld;
using namespace fairworld::kernels;

namespace {

struct Inputs {
  FeatureMatrix x;
  std::vector<double> scores, grad, hess;
  std::vector<int> labels, groups;
};

Inputs make_inputs(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Inputs in;
  in.x = FeatureMatrix(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    in.x(i, 0) = std::floor(u(gen) * 20.0);  // many ties
    in.x(i, 1) = u(gen);
    in.x(i, 2) = u(gen) < 0.5;
    in.scores.push_back(-2.0 + 4.0 * u(gen));
    in.labels.push_back(u(gen) < 0.4);
    in.groups.push_back(u(gen) < 0.3);
  }
  return in;
}

// Runs `fn` under several team sizes.
template <class Fn>
void for_threads(Fn fn) {
  for (int t : {1, 2, 3, 7}) {
    omp_set_num_threads(t);
    fn(t);
  }
  omp_set_num_threads(1);
}

}  // namespace

TEST_CASE("objective kernels: OpenMP equals serial bit for bit") {
  auto in = make_inputs(5003, 1);
  std::vector<double> p_ref(in.scores.size()), g_ref(p_ref.size()), h_ref(p_ref.size());
  const auto m_ref = sigmoid_and_group_means_serial(in.scores, in.groups, p_ref);
  penalised_gradient_serial(p_ref, in.labels, in.groups, m_ref, 3.0, g_ref, h_ref);
  for_threads([&](int) {
    std::vector<double> p(p_ref.size()), g(p.size()), h(p.size());
    const auto m = sigmoid_and_group_means_omp(in.scores, in.groups, p);
    CHECK(m.mean[0] == m_ref.mean[0]);
    CHECK(m.mean[1] == m_ref.mean[1]);
    CHECK(m.count[1] == m_ref.count[1]);
    CHECK(p == p_ref);
    penalised_gradient_omp(p, in.labels, in.groups, m, 3.0, g, h);
    CHECK(g == g_ref);
    CHECK(h == h_ref);
  });
}

TEST_CASE("presort orders each feature, stable in row index") {
  const auto in = make_inputs(500, 2);
  const auto sorted = presort(in.x);
  REQUIRE(sorted.size() == 3);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t k = 1; k < sorted[f].rows.size(); ++k) {
      CHECK(sorted[f].values[k - 1] <= sorted[f].values[k]);
      if (sorted[f].values[k - 1] == sorted[f].values[k]) CHECK(sorted[f].rows[k - 1] < sorted[f].rows[k]);
      CHECK(sorted[f].values[k] == in.x(sorted[f].rows[k], f));
    }
  }
}

TEST_CASE("split search: OpenMP equals serial, and the gain matches a brute-force scan") {
  auto in = make_inputs(2001, 3);
  std::vector<double> p(in.scores.size());
  in.grad.resize(p.size());
  in.hess.resize(p.size());
  const auto m = sigmoid_and_group_means_serial(in.scores, in.groups, p);
  penalised_gradient_serial(p, in.labels, in.groups, m, 0.0, in.grad, in.hess);
  const auto sorted = presort(in.x);
  const int nodes = 3;
  std::vector<int> node_of_row(p.size());
  std::vector<double> ng(nodes, 0.0), nh(nodes, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    node_of_row[i] = i % 10 == 0 ? -1 : static_cast<int>(i % nodes);
    if (node_of_row[i] >= 0) {
      ng[node_of_row[i]] += in.grad[i];
      nh[node_of_row[i]] += in.hess[i];
    }
  }
  const SplitProblem problem{sorted, node_of_row, in.grad, in.hess, ng, nh, 1.0, 1.0};
  std::vector<SplitCandidate> ref(nodes);
  find_best_splits_serial(problem, ref);
  for_threads([&](int) {
    std::vector<SplitCandidate> got(nodes);
    find_best_splits_omp(problem, got);
    for (int k = 0; k < nodes; ++k) {
      CHECK(got[k].gain == ref[k].gain);
      CHECK(got[k].feature == ref[k].feature);
      CHECK(got[k].threshold == ref[k].threshold);
    }
  });

  // Brute force: every (feature, threshold) for node 0, gain = GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2).
  double best = 0.0;
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t r = 0; r < p.size(); ++r) {
      const double t = in.x(r, f);
      double gl = 0, hl = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (node_of_row[i] == 0 && in.x(i, f) <= t) {
          gl += in.grad[i];
          hl += in.hess[i];
        }
      }
      const double gr = ng[0] - gl, hr = nh[0] - hl;
      if (hl < 1.0 || hr < 1.0) continue;
      best = std::max(best, gl * gl / (hl + 1.0) + gr * gr / (hr + 1.0) - ng[0] * ng[0] / (nh[0] + 1.0));
    }
  }
  CHECK(ref[0].gain == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("prediction: OpenMP equals serial") {
  const auto in = make_inputs(999, 4);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Tree> trees(20);
  for (auto& t : trees) {
    t.nodes.resize(7);
    for (int k = 0; k < 3; ++k) {
      t.nodes[k] = {static_cast<int>(u(gen) * 3), u(gen) * 10.0, 2 * k + 1, 2 * k + 2, 0.0};
    }
    for (int k = 3; k < 7; ++k) t.nodes[k].value = u(gen) - 0.5;
  }
  std::vector<double> ref(999);
  predict_margin_serial(trees, 0.25, in.x, ref);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.25;
    for (const auto& t : trees) s += t.eval([&](std::size_t c) { return in.x(i, c); });
    CHECK(ref[i] == doctest::Approx(s));
  }
  for_threads([&](int) {
    std::vector<double> got(999);
    predict_margin_omp(trees, 0.25, in.x, got);
    CHECK(got == ref);
  });
}

TEST_CASE("bootstrap AUC: sweep version equals the materialised resample") {
  const auto in = make_inputs(300, 5);
  std::vector<double> s(in.scores);
  for (auto& v : s) v = std::round(v * 4.0) / 4.0;  // ties
  const auto ref = bootstrap_auc_serial(s, in.labels, 64, 9);
  for_threads([&](int) {
    const auto got = bootstrap_auc_omp(s, in.labels, 64, 9);
    REQUIRE(got.size() == ref.size());
    for (std::size_t b = 0; b < ref.size(); ++b) CHECK(got[b] == doctest::Approx(ref[b]).epsilon(1e-12));
  });
}
