#include "fairworld/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fairworld/csv.hpp"
#include "fairworld/error.hpp"
#include "fairworld/kernels.hpp"

namespace fairworld {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> fulfillment(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return 1.0 - std::abs(*a - *b);
}

// Linear interpolation between order statistics (sorted input).
double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = r;
    i = j;
  }
  return rank;
}

std::string opt_cell(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string("NA"); }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

double disparity(std::span<const double> probs, std::span<const int> groups) {
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    sum[groups[i]] += probs[i];
    ++cnt[groups[i]];
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw EmptyGroup("disparity needs both protected-attribute groups");
  return std::abs(sum[1] / static_cast<double>(cnt[1]) - sum[0] / static_cast<double>(cnt[0]));
}

double auc(std::span<const double> probs, std::span<const int> labels) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  double pos = 0.0, neg = 0.0, num = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double gp = 0.0, gn = 0.0;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) {
      (labels[order[j]] ? gp : gn) += 1.0;
      ++j;
    }
    num += gp * neg + 0.5 * gp * gn;
    neg += gn;
    pos += gp;
    i = j;
  }
  if (pos == 0.0 || neg == 0.0) throw SingleClass("AUC needs both label classes");
  return num / (pos * neg);
}

Interval auc_ci(std::span<const double> probs, std::span<const int> labels, double level, std::size_t replicates,
                std::uint64_t seed) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  if (replicates == 0) throw ConfigError("bootstrap replicates must be >= 1");
  const double point = auc(probs, labels);
  auto reps = kernels::bootstrap_auc_omp(probs, labels, replicates, seed);
  std::erase_if(reps, [](double v) { return std::isnan(v); });
  if (reps.empty()) return {point, point};
  std::sort(reps.begin(), reps.end());
  const double tail = 0.5 * (1.0 - level);
  return {std::min(point, percentile(reps, tail)), std::max(point, percentile(reps, 1.0 - tail))};
}

std::optional<double> Confusion::positive_rate() const { return ratio(tp + fp, n()); }
std::optional<double> Confusion::fpr() const { return ratio(fp, fp + tn); }
std::optional<double> Confusion::fnr() const { return ratio(fn, fn + tp); }
std::optional<double> Confusion::tpr() const { return ratio(tp, fn + tp); }
std::optional<double> Confusion::ppv() const { return ratio(tp, tp + fp); }

std::vector<std::string> FairnessReport::undefined() const {
  std::vector<std::string> out;
  if (!fpr_balance) out.emplace_back("fpr_balance");
  if (!fnr_balance) out.emplace_back("fnr_balance");
  if (!ppv_parity) out.emplace_back("ppv_parity");
  return out;
}

FairnessReport fairness_panel(std::span<const double> probs, std::span<const int> labels,
                              std::span<const int> groups, const PanelOptions& opts) {
  FairnessReport r;
  r.threshold = opts.threshold;
  Confusion cells[2];
  std::size_t positives[2] = {0, 0};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    auto& c = cells[groups[i]];
    const bool pred = probs[i] >= opts.threshold;
    if (labels[i]) {
      ++positives[groups[i]];
      ++(pred ? c.tp : c.fn);
    } else {
      ++(pred ? c.fp : c.tn);
    }
  }
  r.reference_cells = cells[kReferenceGroup];
  r.protected_cells = cells[kProtectedGroup];
  if (cells[0].n() == 0 || cells[1].n() == 0) throw EmptyGroup("fairness panel needs both protected-attribute groups");

  r.dp = *fulfillment(cells[1].positive_rate(), cells[0].positive_rate());
  r.fpr_balance = fulfillment(cells[1].fpr(), cells[0].fpr());
  r.fnr_balance = fulfillment(cells[1].fnr(), cells[0].fnr());
  r.ppv_parity = fulfillment(cells[1].ppv(), cells[0].ppv());
  r.base_rate_protected = static_cast<double>(positives[1]) / static_cast<double>(cells[1].n());
  r.base_rate_reference = static_cast<double>(positives[0]) / static_cast<double>(cells[0].n());
  r.auc = auc(probs, labels);
  r.auc_ci = auc_ci(probs, labels, opts.level, opts.replicates, opts.seed);
  return r;
}

nlohmann::json to_json(const FairnessReport& r) {
  auto cells = [](const Confusion& c) {
    return nlohmann::json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
  };
  return {{"dp", r.dp},
          {"fpr_balance", opt_json(r.fpr_balance)},
          {"fnr_balance", opt_json(r.fnr_balance)},
          {"ppv_parity", opt_json(r.ppv_parity)},
          {"auc", r.auc},
          {"auc_ci", {r.auc_ci.lo, r.auc_ci.hi}},
          {"base_rates", {{"protected", r.base_rate_protected}, {"reference", r.base_rate_reference}}},
          {"threshold", r.threshold},
          {"confusion", {{"protected", cells(r.protected_cells)}, {"reference", cells(r.reference_cells)}}},
          {"undefined", r.undefined()}};
}

std::string panel_csv_header() { return "world,dp,fpr_balance,fnr_balance,ppv_parity,auc,auc_ci_lo,auc_ci_hi"; }

std::string panel_csv_row(const std::string& world, const FairnessReport& r) {
  std::ostringstream os;
  os << world << ',' << csv::format_double(r.dp) << ',' << opt_cell(r.fpr_balance) << ','
     << opt_cell(r.fnr_balance) << ',' << opt_cell(r.ppv_parity) << ',' << csv::format_double(r.auc) << ','
     << csv::format_double(r.auc_ci.lo) << ',' << csv::format_double(r.auc_ci.hi);
  return os.str();
}

double base_rate(const Dataset& ds, int group) {
  const auto y = ds.labels();
  const auto g = ds.groups();
  std::size_t n = 0, pos = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (g[i] != group) continue;
    ++n;
    pos += static_cast<std::size_t>(y[i]);
  }
  if (n == 0) throw EmptyGroup("group " + std::to_string(group) + " has no rows");
  return static_cast<double>(pos) / static_cast<double>(n);
}

double base_rate_gap(const Dataset& ds) {
  return std::abs(base_rate(ds, kProtectedGroup) - base_rate(ds, kReferenceGroup));
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw SchemaMismatch("spearman inputs differ in length");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double ks_statistic(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw TooFewRows("KS statistic needs two non-empty samples");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace fairworld
