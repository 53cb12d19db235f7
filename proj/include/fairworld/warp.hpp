#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/dataset.hpp"
#include "fairworld/empirical.hpp"
#include "fairworld/glm.hpp"
#include "fairworld/graph.hpp"

namespace fairworld {

// How a continuous node's residual is formed from its fitted location mu.
enum class ResidualKind { None, Ratio, Difference };  // None: binary node

struct WarpNodeModel {
  std::string node;
  std::vector<std::string> predictors;  // non-PA parents
  bool binary = false;
  ResidualKind residual = ResidualKind::None;
  std::array<GlmFit, 2> location;                     // indexed by group
  std::array<EmpiricalDistribution, 2> residuals;     // continuous nodes only
};

struct WarpOptions {
  // Rows of this group are moved onto the other group's conditional
  // distributions. Default: protected a -> reference a'.
  int source_group = kProtectedGroup;
  std::uint64_t seed = 0;  // randomised ranks for binary nodes
};

struct WarpModel {
  std::vector<WarpNodeModel> nodes;  // PA descendants in topological order
  int source_group = kProtectedGroup;
  std::uint64_t seed = 0;
  nlohmann::json schema;

  int target_group() const noexcept { return 1 - source_group; }
};

// Per descendant, per group: logistic location model for binary nodes, log
// link for positive continuous nodes (identity link otherwise). Both group
// models are fitted on the observed rows of their own group.
// Throws DegenerateGroup.
WarpModel warp_fit(const Dataset& train, const AdjacencyInfo& adj, const WarpOptions& opts = {});

// Source-group rows: each descendant, in topological order, keeps its
// within-group rank (residual CDF, or a randomised rank inside the observed
// class' probability mass for binary nodes) and takes the value at that rank
// under the target group's model evaluated at the already-warped parents.
// Other rows and non-descendants are returned unchanged. Throws SchemaMismatch.
Dataset warp_apply(const WarpModel& model, const Dataset& ds);

nlohmann::json to_json(const WarpModel& model);
WarpModel warp_model_from_json(const nlohmann::json& j);

// Randomised rank of a binary outcome whose success probability is p:
// y = 0 -> v (1 - p), y = 1 -> (1 - p) + v p, for v in (0, 1).
double binary_rank(int y, double p, double v) noexcept;

}  // namespace fairworld
