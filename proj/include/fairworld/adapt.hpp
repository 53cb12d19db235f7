#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/dataset.hpp"
#include "fairworld/empirical.hpp"
#include "fairworld/graph.hpp"

namespace fairworld {

// Conditional distribution of one node given its non-PA parents, estimated
// per PA group over discretised parent strata. Binary parents are their own
// strata; continuous parents are cut at pooled training deciles.
class StrataEstimator {
 public:
  struct Stratum {
    std::size_t rows = 0;
    double positives = 0.0;             // binary node
    EmpiricalDistribution distribution;  // continuous node
  };

  StrataEstimator() = default;

  // `parents` are full training columns; `rows_by_group` selects each group's rows.
  static StrataEstimator fit(const std::vector<std::span<const double>>& parents,
                             const std::vector<bool>& parent_binary, std::span<const double> y, bool binary,
                             const std::array<std::vector<std::size_t>, 2>& rows_by_group, int bins,
                             std::size_t min_rows);

  // Bin index of each parent value.
  std::vector<int> cell(std::span<const double> parent_values) const;

  // Stratum of `group` for the parent cell; when that stratum is missing or
  // smaller than min_rows, the nearest populated stratum in bin-index (L1)
  // distance is used (lowest key on ties) and `fallback` is set.
  const Stratum& lookup(int group, const std::vector<int>& cell, bool& fallback) const;

  bool binary() const noexcept { return binary_; }

  nlohmann::json to_json() const;
  static StrataEstimator from_json(const nlohmann::json& j);

 private:
  std::int64_t key(const std::vector<int>& cell) const;
  std::vector<int> unkey(std::int64_t key) const;

  bool binary_ = false;
  std::size_t min_rows_ = 1;
  std::vector<std::vector<double>> cuts_;  // per parent; empty for binary parents
  std::vector<int> radix_;                 // number of cells per parent
  std::array<std::map<std::int64_t, Stratum>, 2> strata_;
};

struct AdaptNodeModel {
  std::string node;
  std::vector<std::string> predictors;  // non-PA parents
  StrataEstimator estimator;
};

struct AdaptOptions {
  int baseline = kReferenceGroup;  // every row is projected onto this group
  int bins = 10;                   // continuous-parent bins
  std::size_t min_stratum_rows = 5;
  std::uint64_t seed = 0;          // randomised ranks for binary nodes
};

struct AdaptModel {
  std::vector<AdaptNodeModel> nodes;  // PA descendants in topological order
  int baseline = kReferenceGroup;
  std::uint64_t seed = 0;
  nlohmann::json schema;
};

struct AdaptDiagnostics {
  std::size_t rows_adapted = 0;
  std::map<std::string, std::size_t> fallbacks;  // per node: nearest-stratum substitutions
};

// Throws DegenerateGroup when a PA group has no rows.
AdaptModel adapt_fit(const Dataset& train, const AdjacencyInfo& adj, const AdaptOptions& opts = {});

// Non-baseline rows: each descendant, in topological order, keeps its
// conditional quantile within its own group's stratum (original parents) and
// takes the baseline group's value at that quantile in the stratum of the
// adapted parents. Baseline rows and the PA column come back unchanged.
// Throws SchemaMismatch.
Dataset adapt_apply(const AdaptModel& model, const Dataset& ds, AdaptDiagnostics* diagnostics = nullptr);

nlohmann::json to_json(const AdaptModel& model);
AdaptModel adapt_model_from_json(const nlohmann::json& j);

}  // namespace fairworld
