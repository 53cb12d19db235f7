#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fairworld {

// Location models used by the warping pre-processor.
//   Logistic:  binary response, logit link.
//   LogLinear: positive response, log link with Gamma-type variance (mu^2).
//   Linear:    identity link, least squares.
enum class GlmKind { Logistic, LogLinear, Linear };

std::string to_string(GlmKind k);
GlmKind glm_kind_from_string(const std::string& s);

struct GlmFit {
  GlmKind kind = GlmKind::Linear;
  std::vector<double> coefficients;  // intercept first, then one per predictor column
  int iterations = 0;

  double linear_predictor(std::span<const double> x) const;
  double mean(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static GlmFit from_json(const nlohmann::json& j);
};

// `columns` holds one vector per predictor, each of length y.size().
// Fitted by IRLS with a tiny ridge on the slopes; predictors are standardised
// internally and the coefficients mapped back.
GlmFit fit_glm(GlmKind kind, const std::vector<std::vector<double>>& columns, std::span<const double> y);

}  // namespace fairworld
