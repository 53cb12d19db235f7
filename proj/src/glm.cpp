#include "fairworld/glm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "fairworld/error.hpp"

namespace fairworld {

std::string to_string(GlmKind k) {
  switch (k) {
    case GlmKind::Logistic: return "logistic";
    case GlmKind::LogLinear: return "log_linear";
    case GlmKind::Linear: return "linear";
  }
  return "?";
}

GlmKind glm_kind_from_string(const std::string& s) {
  if (s == "logistic") return GlmKind::Logistic;
  if (s == "log_linear") return GlmKind::LogLinear;
  if (s == "linear") return GlmKind::Linear;
  throw SpecError("unknown GLM kind '" + s + "'");
}

double GlmFit::linear_predictor(std::span<const double> x) const {
  double eta = coefficients.at(0);
  for (std::size_t j = 0; j < x.size(); ++j) eta += coefficients.at(j + 1) * x[j];
  return eta;
}

double GlmFit::mean(std::span<const double> x) const {
  const double eta = linear_predictor(x);
  switch (kind) {
    case GlmKind::Logistic: return 1.0 / (1.0 + std::exp(-eta));
    case GlmKind::LogLinear: return std::exp(eta);
    case GlmKind::Linear: return eta;
  }
  return eta;
}

nlohmann::json GlmFit::to_json() const {
  return {{"kind", to_string(kind)}, {"coefficients", coefficients}, {"iterations", iterations}};
}

GlmFit GlmFit::from_json(const nlohmann::json& j) {
  GlmFit f;
  f.kind = glm_kind_from_string(j.at("kind").get<std::string>());
  f.coefficients = j.at("coefficients").get<std::vector<double>>();
  f.iterations = j.value("iterations", 0);
  return f;
}

GlmFit fit_glm(GlmKind kind, const std::vector<std::vector<double>>& columns, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto k = static_cast<Eigen::Index>(columns.size());
  if (n == 0) throw DegenerateGroup("cannot fit a location model on zero rows");

  // Standardised design with intercept column.
  Eigen::MatrixXd X(n, k + 1);
  std::vector<double> centre(columns.size(), 0.0), spread(columns.size(), 1.0);
  X.col(0).setOnes();
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& c = columns[static_cast<std::size_t>(j)];
    const double m = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : c) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    centre[j] = m;
    spread[j] = sd > 0.0 ? sd : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) X(i, j + 1) = (c[static_cast<std::size_t>(i)] - m) / spread[j];
  }
  Eigen::Map<const Eigen::VectorXd> Y(y.data(), n);

  const double ybar = Y.mean();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k + 1);
  if (kind == GlmKind::Logistic) {
    if (ybar <= 0.0 || ybar >= 1.0) throw DegenerateGroup("binary response is constant; logistic model is unidentified");
    beta(0) = std::log(ybar / (1.0 - ybar));
  } else if (kind == GlmKind::LogLinear) {
    if ((Y.array() < 0.0).any() || ybar <= 0.0) throw DegenerateGroup("log-linear model needs a positive response");
    beta(0) = std::log(ybar);
  } else {
    beta(0) = ybar;
  }

  const double ridge = 1e-8 * static_cast<double>(n);
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Identity(k + 1, k + 1) * ridge;
  penalty(0, 0) = 0.0;

  int it = 0;
  if (kind == GlmKind::Linear) {
    Eigen::MatrixXd A = X.transpose() * X + penalty;
    beta = A.ldlt().solve(X.transpose() * Y);
    it = 1;
  } else {
    for (it = 1; it <= 100; ++it) {
      Eigen::VectorXd eta = X * beta;
      Eigen::VectorXd w(n), z(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (kind == GlmKind::Logistic) {
          const double mu = 1.0 / (1.0 + std::exp(-eta(i)));
          const double v = std::max(mu * (1.0 - mu), 1e-10);
          w(i) = v;
          z(i) = eta(i) + (Y(i) - mu) / v;
        } else {
          const double mu = std::exp(eta(i));
          w(i) = 1.0;  // (dmu/deta)^2 / V(mu) with V(mu) = mu^2
          z(i) = eta(i) + (Y(i) - mu) / mu;
        }
      }
      Eigen::MatrixXd A = X.transpose() * w.asDiagonal() * X + penalty;
      Eigen::VectorXd next = A.ldlt().solve(X.transpose() * (w.asDiagonal() * z));
      if (!next.allFinite()) throw InvalidParamError("location model fit diverged");
      const double step = (next - beta).cwiseAbs().maxCoeff();
      beta = next;
      if (step < 1e-10) break;
    }
  }

  GlmFit fit;
  fit.kind = kind;
  fit.iterations = it;
  fit.coefficients.assign(static_cast<std::size_t>(k + 1), 0.0);
  double intercept = beta(0);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double slope = beta(j + 1) / spread[j];
    fit.coefficients[static_cast<std::size_t>(j + 1)] = slope;
    intercept -= slope * centre[j];
  }
  fit.coefficients[0] = intercept;
  return fit;
}

}  // namespace fairworld
