#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/scm.hpp"

namespace fairworld {

// Causal structure the pre-processors work from: parent sets, the topological
// order and the exact (transitive) descendant set of the protected attribute.
struct AdjacencyInfo {
  std::map<std::string, std::vector<std::string>> parents;
  std::vector<std::string> order;
  std::set<std::string> pa_descendants;
  std::string protected_node;
  std::string target_node;

  // Descendants of the PA in topological order.
  std::vector<std::string> descendants_in_order() const;
  // Parents other than the PA.
  std::vector<std::string> non_pa_parents(const std::string& node) const;
};

AdjacencyInfo adjacency_from_scm(const ScmSpec& spec);

// Accepts either a full SCM document or a bare DAG:
// {"protected": .., "target": .., "nodes": [{"name": .., "parents": [..]}]}.
AdjacencyInfo adjacency_from_json(const nlohmann::json& j);
AdjacencyInfo load_adjacency(const std::string& path);

}  // namespace fairworld
