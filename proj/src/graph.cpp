#include "fairworld/graph.hpp"

#include <algorithm>
#include <fstream>

#include "fairworld/error.hpp"

namespace fairworld {

std::vector<std::string> AdjacencyInfo::descendants_in_order() const {
  std::vector<std::string> out;
  for (const auto& n : order) {
    if (pa_descendants.contains(n)) out.push_back(n);
  }
  return out;
}

std::vector<std::string> AdjacencyInfo::non_pa_parents(const std::string& node) const {
  std::vector<std::string> out;
  for (const auto& p : parents.at(node)) {
    if (p != protected_node) out.push_back(p);
  }
  return out;
}

namespace {

AdjacencyInfo build(const ScmSpec& structure) {
  AdjacencyInfo adj;
  adj.order = validate_dag(structure);
  adj.protected_node = structure.protected_node;
  adj.target_node = structure.target_node;
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& n : structure.nodes) {
    adj.parents[n.name] = n.parents;
    for (const auto& p : n.parents) children[p].push_back(n.name);
  }
  std::vector<std::string> stack{adj.protected_node};
  while (!stack.empty()) {
    const auto cur = stack.back();
    stack.pop_back();
    for (const auto& c : children[cur]) {
      if (adj.pa_descendants.insert(c).second) stack.push_back(c);
    }
  }
  return adj;
}

}  // namespace

AdjacencyInfo adjacency_from_scm(const ScmSpec& spec) { return build(spec); }

AdjacencyInfo adjacency_from_json(const nlohmann::json& j) {
  const bool full = !j.at("nodes").empty() && j.at("nodes").front().contains("family");
  if (full) return build(scm_from_json(j));
  // Bare DAG: wrap it as an SCM with placeholder Bernoulli families so the
  // structural checks in validate_dag apply unchanged.
  ScmSpec s;
  try {
    s.protected_node = j.at("protected").get<std::string>();
    s.target_node = j.at("target").get<std::string>();
    for (const auto& jn : j.at("nodes")) {
      NodeSpec n;
      n.name = jn.at("name").get<std::string>();
      n.parents = jn.value("parents", std::vector<std::string>{});
      n.family = Family::Bernoulli;
      n.link = n.parents.empty() ? Link::Identity : Link::Logit;
      s.nodes.push_back(std::move(n));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed DAG document: ") + e.what());
  }
  return build(s);
}

AdjacencyInfo load_adjacency(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open DAG file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("cannot parse DAG file '" + path + "': " + e.what());
  }
  return adjacency_from_json(j);
}

}  // namespace fairworld
