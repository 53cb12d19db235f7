#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/dataset.hpp"

namespace fairworld {

// |mean(p | a) - mean(p | a')|. Throws EmptyGroup.
double disparity(std::span<const double> probs, std::span<const int> groups);

// Mann-Whitney AUC, ties count one half. Throws SingleClass.
double auc(std::span<const double> probs, std::span<const int> labels);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap over row resamples; widened if needed so it contains
// the point estimate. Replicates missing a class are skipped.
Interval auc_ci(std::span<const double> probs, std::span<const int> labels, double level = 0.95,
                std::size_t replicates = 1000, std::uint64_t seed = 0);

// Per-group confusion counts at a hard-label threshold.
struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t n() const noexcept { return tp + fp + tn + fn; }
  std::optional<double> positive_rate() const;
  std::optional<double> fpr() const;
  std::optional<double> fnr() const;
  std::optional<double> tpr() const;
  std::optional<double> ppv() const;
};

// Fulfillment values are 1 - |gap|; an entry is empty when a rate is undefined
// in either group (zero denominator).
struct FairnessReport {
  double dp = 0.0;
  std::optional<double> fpr_balance;
  std::optional<double> fnr_balance;
  std::optional<double> ppv_parity;
  double auc = 0.0;
  Interval auc_ci;
  double base_rate_protected = 0.0;
  double base_rate_reference = 0.0;
  double threshold = 0.5;
  Confusion protected_cells;
  Confusion reference_cells;

  // Undefined-entry names, e.g. {"ppv_parity"}.
  std::vector<std::string> undefined() const;
};

struct PanelOptions {
  double threshold = 0.5;
  double level = 0.95;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
};

// Throws EmptyGroup when a PA group is empty and SingleClass when the labels
// have one class (AUC undefined).
FairnessReport fairness_panel(std::span<const double> probs, std::span<const int> labels,
                              std::span<const int> groups, const PanelOptions& opts = {});

nlohmann::json to_json(const FairnessReport& r);
std::string panel_csv_header();
std::string panel_csv_row(const std::string& world, const FairnessReport& r);

double base_rate(const Dataset& ds, int group);
// |P(Y=1 | a) - P(Y=1 | a')|. Throws EmptyGroup.
double base_rate_gap(const Dataset& ds);

// Spearman correlation with average ranks for ties. Returns NaN when either
// input has zero variance.
double spearman(std::span<const double> x, std::span<const double> y);

// Two-sample Kolmogorov-Smirnov statistic sup |F_x - F_y|.
double ks_statistic(std::span<const double> x, std::span<const double> y);
// Asymptotic critical value c(alpha) * sqrt((n + m) / (n m)), c = sqrt(-ln(alpha/2) / 2).
double ks_critical(std::size_t n, std::size_t m, double alpha = 0.01);

}  // namespace fairworld
