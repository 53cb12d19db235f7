#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/dataset.hpp"

namespace fairworld {

enum class Family { Bernoulli, Gamma };
enum class Link { Logit, Log, Identity };

std::string to_string(Family f);
std::string to_string(Link l);

// Linear predictor: intercept + sum of coefficient * parent value.
struct LinearPredictor {
  double intercept = 0.0;
  std::map<std::string, double> coefficients;

  double eval(const std::map<std::string, double>& parent_values) const;
  bool operator==(const LinearPredictor&) const = default;
};

// One structural equation. Bernoulli nodes carry `mean` (success probability
// through `link`); Gamma nodes carry `shape` and `scale` predictors, both
// through `link`. Identity links are only allowed on parentless nodes, where
// the intercept is the parameter itself.
struct NodeSpec {
  std::string name;
  std::vector<std::string> parents;
  Family family = Family::Bernoulli;
  Link link = Link::Logit;
  LinearPredictor mean;
  LinearPredictor shape;
  LinearPredictor scale;

  bool operator==(const NodeSpec&) const = default;
};

struct ScmSpec {
  std::vector<NodeSpec> nodes;
  std::string protected_node;
  std::string target_node;

  const NodeSpec& node(const std::string& name) const;
  bool operator==(const ScmSpec&) const = default;
};

enum class WorldKind { Real, FiND };

WorldKind world_from_string(const std::string& s);
std::string to_string(WorldKind w);

// Checks parents, link/family pairing and coefficient references; returns a
// topological order (ties broken by declaration order). Throws CycleError,
// UnknownParentError or SpecError.
std::vector<std::string> validate_dag(const ScmSpec& spec);

// Distribution parameters of a node given its parent values.
struct NodeParams {
  double probability = 0.0;  // Bernoulli
  double shape = 0.0;        // Gamma
  double scale = 0.0;
};
NodeParams node_params(const NodeSpec& node, const std::map<std::string, double>& parent_values);

// Inverse-CDF draw from the node's family for a uniform u in (0, 1).
double sample_from_uniform(const NodeSpec& node, const NodeParams& params, double u);

// Column kind each node produces.
ColumnKind column_kind(const NodeSpec& node);

// Samples n rows. One uniform per (node, row), derived from `seed` and the
// node's declaration index, is pushed through the inverse CDF; FiND evaluates
// every structural equation other than the PA's at A = a' (0).
Dataset simulate(const ScmSpec& spec, WorldKind world, std::size_t n, std::uint64_t seed);

// Real and FiND datasets sharing all exogenous draws (row i is a counterfactual pair).
std::pair<Dataset, Dataset> paired_worlds(const ScmSpec& spec, std::size_t n, std::uint64_t seed);

ScmSpec scm_from_json(const nlohmann::json& j);
nlohmann::json scm_to_json(const ScmSpec& spec);
ScmSpec load_scm(const std::string& path);

// Credit-application DGP: A -> {X_A, X_D, Y}, X_C -> {X_A, X_D, Y}, {X_A, X_D} -> Y.
ScmSpec default_credit_scm();

}  // namespace fairworld
