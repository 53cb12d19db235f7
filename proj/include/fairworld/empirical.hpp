#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

namespace fairworld {

// Piecewise-linear empirical CDF / quantile pair over knots (x_k, p_k) with
// p_k = k / (n - 1), i.e. the linearly interpolated sample quantile, so the
// knots run from the sample minimum (p = 0) to the maximum (p = 1). On
// distinct data both maps are strictly increasing inside the knot range; they
// clamp outside it. Large samples are compressed to `max_knots` evenly spaced
// quantiles.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::vector<double> sample, std::size_t max_knots = 2001);

  double cdf(double x) const;
  double quantile(double u) const;

  std::size_t sample_size() const noexcept { return sample_size_; }
  bool empty() const noexcept { return xs_.empty(); }
  const std::vector<double>& knots() const noexcept { return xs_; }
  const std::vector<double>& positions() const noexcept { return ps_; }

  nlohmann::json to_json() const;
  static EmpiricalDistribution from_json(const nlohmann::json& j);

 private:
  std::vector<double> xs_;
  std::vector<double> ps_;
  std::size_t sample_size_ = 0;
};

}  // namespace fairworld
