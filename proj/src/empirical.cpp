#include "fairworld/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairworld {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> sample, std::size_t max_knots)
    : sample_size_(sample.size()) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  if (n == 0) return;
  if (n == 1) {
    xs_ = {sample[0]};
    ps_ = {0.5};
    return;
  }
  const auto last = static_cast<double>(n - 1);
  if (max_knots < 2 || n <= max_knots) {
    xs_ = std::move(sample);
    ps_.resize(n);
    for (std::size_t k = 0; k < n; ++k) ps_[k] = static_cast<double>(k) / last;
    return;
  }
  // Compress: evaluate the full-sample quantile function on an even grid.
  xs_.resize(max_knots);
  ps_.resize(max_knots);
  for (std::size_t j = 0; j < max_knots; ++j) {
    const double p = static_cast<double>(j) / static_cast<double>(max_knots - 1);
    const double pos = p * last;
    const auto lo = std::min(static_cast<std::size_t>(pos), n - 1);
    const auto hi = std::min(lo + 1, n - 1);
    xs_[j] = sample[lo] + (pos - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
    ps_[j] = p;
  }
}

double EmpiricalDistribution::cdf(double x) const {
  if (xs_.empty()) throw std::logic_error("cdf of an empty distribution");
  const auto lo = std::lower_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  const auto hi = std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  const auto n = static_cast<std::ptrdiff_t>(xs_.size());
  if (lo < hi) return 0.5 * (ps_[lo] + ps_[hi - 1]);  // x is a knot (possibly tied)
  if (lo == 0) return ps_.front();
  if (lo == n) return ps_.back();
  const double t = (x - xs_[lo - 1]) / (xs_[lo] - xs_[lo - 1]);
  return ps_[lo - 1] + t * (ps_[lo] - ps_[lo - 1]);
}

double EmpiricalDistribution::quantile(double u) const {
  if (xs_.empty()) throw std::logic_error("quantile of an empty distribution");
  if (u <= ps_.front()) return xs_.front();
  if (u >= ps_.back()) return xs_.back();
  const auto k = std::upper_bound(ps_.begin(), ps_.end(), u) - ps_.begin();  // ps_[k-1] <= u < ps_[k]
  const double t = (u - ps_[k - 1]) / (ps_[k] - ps_[k - 1]);
  return xs_[k - 1] + t * (xs_[k] - xs_[k - 1]);
}

nlohmann::json EmpiricalDistribution::to_json() const {
  return {{"sample_size", sample_size_}, {"knots", xs_}, {"positions", ps_}};
}

EmpiricalDistribution EmpiricalDistribution::from_json(const nlohmann::json& j) {
  EmpiricalDistribution d;
  d.sample_size_ = j.at("sample_size").get<std::size_t>();
  d.xs_ = j.at("knots").get<std::vector<double>>();
  d.ps_ = j.at("positions").get<std::vector<double>>();
  if (d.xs_.size() != d.ps_.size()) throw std::invalid_argument("knots/positions length mismatch");
  return d;
}

}  // namespace fairworld
