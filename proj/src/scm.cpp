#include "fairworld/scm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "fairworld/error.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

std::string to_string(Family f) { return f == Family::Gamma ? "gamma" : "bernoulli"; }

std::string to_string(Link l) {
  switch (l) {
    case Link::Logit: return "logit";
    case Link::Log: return "log";
    case Link::Identity: return "identity";
  }
  return "?";
}

std::string to_string(WorldKind w) { return w == WorldKind::FiND ? "find" : "real"; }

WorldKind world_from_string(const std::string& s) {
  if (s == "real") return WorldKind::Real;
  if (s == "find") return WorldKind::FiND;
  throw ConfigError("unknown world '" + s + "' (expected real or find)");
}

double LinearPredictor::eval(const std::map<std::string, double>& parent_values) const {
  double eta = intercept;
  for (const auto& [name, coef] : coefficients) eta += coef * parent_values.at(name);
  return eta;
}

const NodeSpec& ScmSpec::node(const std::string& name) const {
  for (const auto& n : nodes) {
    if (n.name == name) return n;
  }
  throw SpecError("no node named '" + name + "'");
}

namespace {

double apply_link(Link link, double eta) {
  switch (link) {
    case Link::Logit: return 1.0 / (1.0 + std::exp(-eta));
    case Link::Log: return std::exp(eta);
    case Link::Identity: return eta;
  }
  return eta;
}

void check_predictor(const NodeSpec& node, const LinearPredictor& lp, const char* what) {
  for (const auto& [name, coef] : lp.coefficients) {
    if (std::find(node.parents.begin(), node.parents.end(), name) == node.parents.end()) {
      throw SpecError("node '" + node.name + "' " + what + " coefficient references '" + name +
                      "', which is not a declared parent");
    }
    if (!std::isfinite(coef)) throw SpecError("node '" + node.name + "' has a non-finite coefficient");
  }
}

}  // namespace

std::vector<std::string> validate_dag(const ScmSpec& spec) {
  if (spec.nodes.empty()) throw SpecError("SCM has no nodes");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (!index.emplace(spec.nodes[i].name, i).second) {
      throw SpecError("duplicate node '" + spec.nodes[i].name + "'");
    }
  }
  for (const auto& node : spec.nodes) {
    for (const auto& p : node.parents) {
      if (!index.contains(p)) throw UnknownParentError("node '" + node.name + "' has unknown parent '" + p + "'");
    }
    const bool root = node.parents.empty();
    if (node.link == Link::Identity && !root) {
      throw SpecError("node '" + node.name + "': identity link is only allowed on parentless nodes");
    }
    if (node.family == Family::Bernoulli) {
      if (node.link == Link::Log) throw SpecError("Bernoulli node '" + node.name + "' must use a logit link");
      check_predictor(node, node.mean, "mean");
    } else {
      if (node.link == Link::Logit) throw SpecError("Gamma node '" + node.name + "' must use a log link");
      check_predictor(node, node.shape, "shape");
      check_predictor(node, node.scale, "scale");
    }
  }
  if (!index.contains(spec.protected_node)) throw SpecError("protected node '" + spec.protected_node + "' not declared");
  if (!index.contains(spec.target_node)) throw SpecError("target node '" + spec.target_node + "' not declared");
  if (spec.protected_node == spec.target_node) throw SpecError("protected and target node must differ");
  const auto& pa = spec.node(spec.protected_node);
  if (!pa.parents.empty()) throw SpecError("protected node '" + pa.name + "' must be a root node");
  if (pa.family != Family::Bernoulli) throw SpecError("protected node must be Bernoulli");
  if (spec.node(spec.target_node).family != Family::Bernoulli) throw SpecError("target node must be Bernoulli");

  // DFS with colours so the reported back edge is concrete.
  enum Colour { White, Grey, Black };
  std::vector<Colour> colour(spec.nodes.size(), White);
  std::vector<std::string> order;
  auto visit = [&](auto&& self, std::size_t i) -> void {
    colour[i] = Grey;
    for (const auto& p : spec.nodes[i].parents) {
      const auto j = index.at(p);
      if (colour[j] == Grey) {
        throw CycleError("cycle through edge " + p + " -> " + spec.nodes[i].name);
      }
      if (colour[j] == White) self(self, j);
    }
    colour[i] = Black;
    order.push_back(spec.nodes[i].name);
  };
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (colour[i] == White) visit(visit, i);
  }
  return order;
}

NodeParams node_params(const NodeSpec& node, const std::map<std::string, double>& parent_values) {
  NodeParams p;
  if (node.family == Family::Bernoulli) {
    p.probability = apply_link(node.link, node.mean.eval(parent_values));
    if (!(p.probability >= 0.0 && p.probability <= 1.0)) {
      throw InvalidParamError("node '" + node.name + "': success probability outside [0, 1]");
    }
  } else {
    p.shape = apply_link(node.link, node.shape.eval(parent_values));
    p.scale = apply_link(node.link, node.scale.eval(parent_values));
    if (!(p.shape > 0.0 && std::isfinite(p.shape) && p.scale > 0.0 && std::isfinite(p.scale))) {
      throw InvalidParamError("node '" + node.name + "': non-positive Gamma shape or scale");
    }
  }
  return p;
}

double sample_from_uniform(const NodeSpec& node, const NodeParams& params, double u) {
  if (node.family == Family::Bernoulli) return u > 1.0 - params.probability ? 1.0 : 0.0;
  return params.scale * boost::math::gamma_p_inv(params.shape, u);
}

ColumnKind column_kind(const NodeSpec& node) {
  return node.family == Family::Bernoulli ? ColumnKind::Binary : ColumnKind::Numeric;
}

namespace {

// Linear predictor resolved against column positions.
struct CompiledPredictor {
  double intercept = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;

  double eval(const std::vector<std::vector<double>>& cols, std::size_t row) const {
    double eta = intercept;
    for (const auto& [col, coef] : terms) eta += coef * cols[col][row];
    return eta;
  }
};

CompiledPredictor compile(const LinearPredictor& lp, const std::map<std::string, std::size_t>& index,
                          const std::string& pa, bool drop_pa) {
  CompiledPredictor c{lp.intercept, {}};
  for (const auto& [name, coef] : lp.coefficients) {
    if (drop_pa && name == pa) continue;  // evaluating at A = a' = 0
    c.terms.emplace_back(index.at(name), coef);
  }
  return c;
}

}  // namespace

Dataset simulate(const ScmSpec& spec, WorldKind world, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("n must be positive");
  const auto order = validate_dag(spec);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) index[spec.nodes[i].name] = i;

  std::vector<std::vector<double>> cols(spec.nodes.size());
  for (const auto& name : order) {
    const auto k = index.at(name);
    const auto& node = spec.nodes[k];
    const bool drop_pa = world == WorldKind::FiND && node.name != spec.protected_node;
    const auto mean = compile(node.mean, index, spec.protected_node, drop_pa);
    const auto shape = compile(node.shape, index, spec.protected_node, drop_pa);
    const auto scale = compile(node.scale, index, spec.protected_node, drop_pa);

    Rng rng(derive_seed(seed, "scm-node", k));
    auto& out = cols[k];
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform();
      NodeParams p;
      if (node.family == Family::Bernoulli) {
        p.probability = apply_link(node.link, mean.eval(cols, i));
        if (!(p.probability >= 0.0 && p.probability <= 1.0)) {
          throw InvalidParamError("node '" + node.name + "': success probability outside [0, 1] at row " +
                                  std::to_string(i));
        }
      } else {
        p.shape = apply_link(node.link, shape.eval(cols, i));
        p.scale = apply_link(node.link, scale.eval(cols, i));
        if (!(p.shape > 0.0 && std::isfinite(p.shape) && p.scale > 0.0 && std::isfinite(p.scale))) {
          throw InvalidParamError("node '" + node.name + "': non-positive Gamma shape or scale at row " +
                                  std::to_string(i));
        }
      }
      out[i] = sample_from_uniform(node, p, u);
    }
  }

  std::vector<Column> columns;
  for (std::size_t k = 0; k < spec.nodes.size(); ++k) {
    columns.push_back({spec.nodes[k].name, column_kind(spec.nodes[k]), std::move(cols[k])});
  }
  return Dataset(std::move(columns), spec.protected_node, spec.target_node);
}

std::pair<Dataset, Dataset> paired_worlds(const ScmSpec& spec, std::size_t n, std::uint64_t seed) {
  return {simulate(spec, WorldKind::Real, n, seed), simulate(spec, WorldKind::FiND, n, seed)};
}

namespace {

Family family_from_string(const std::string& s) {
  if (s == "bernoulli") return Family::Bernoulli;
  if (s == "gamma") return Family::Gamma;
  throw SpecError("unknown family '" + s + "'");
}

Link link_from_string(const std::string& s) {
  if (s == "logit") return Link::Logit;
  if (s == "log") return Link::Log;
  if (s == "identity") return Link::Identity;
  throw SpecError("unknown link '" + s + "'");
}

LinearPredictor predictor_from_json(const nlohmann::json& j) {
  LinearPredictor lp;
  for (const auto& [key, value] : j.items()) {
    if (key == "intercept") {
      lp.intercept = value.get<double>();
    } else {
      lp.coefficients[key] = value.get<double>();
    }
  }
  return lp;
}

nlohmann::json predictor_to_json(const LinearPredictor& lp) {
  nlohmann::json j = nlohmann::json::object();
  j["intercept"] = lp.intercept;
  for (const auto& [k, v] : lp.coefficients) j[k] = v;
  return j;
}

}  // namespace

ScmSpec scm_from_json(const nlohmann::json& j) {
  ScmSpec spec;
  try {
    spec.protected_node = j.at("protected").get<std::string>();
    spec.target_node = j.at("target").get<std::string>();
    for (const auto& jn : j.at("nodes")) {
      NodeSpec n;
      n.name = jn.at("name").get<std::string>();
      n.parents = jn.value("parents", std::vector<std::string>{});
      n.family = family_from_string(jn.at("family").get<std::string>());
      n.link = link_from_string(jn.at("link").get<std::string>());
      const auto& coefs = jn.at("coefficients");
      if (n.family == Family::Bernoulli) {
        n.mean = predictor_from_json(coefs);
      } else {
        n.shape = predictor_from_json(coefs.at("shape"));
        n.scale = predictor_from_json(coefs.at("scale"));
      }
      spec.nodes.push_back(std::move(n));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed SCM document: ") + e.what());
  }
  return spec;
}

nlohmann::json scm_to_json(const ScmSpec& spec) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : spec.nodes) {
    nlohmann::json jn = {{"name", n.name}, {"parents", n.parents}, {"family", to_string(n.family)},
                         {"link", to_string(n.link)}};
    if (n.family == Family::Bernoulli) {
      jn["coefficients"] = predictor_to_json(n.mean);
    } else {
      jn["coefficients"] = {{"shape", predictor_to_json(n.shape)}, {"scale", predictor_to_json(n.scale)}};
    }
    nodes.push_back(std::move(jn));
  }
  return {{"version", 1}, {"protected", spec.protected_node}, {"target", spec.target_node}, {"nodes", nodes}};
}

ScmSpec load_scm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open SCM file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("cannot parse SCM file '" + path + "': " + e.what());
  }
  return scm_from_json(j);
}

ScmSpec default_credit_scm() {
  ScmSpec s;
  s.protected_node = "A";
  s.target_node = "Y";

  NodeSpec a{"A", {}, Family::Bernoulli, Link::Identity, {0.5, {}}, {}, {}};
  NodeSpec xc{"X_C", {}, Family::Gamma, Link::Identity, {}, {3.26, {}}, {10.91, {}}};
  // Loan amount: shape constant, scale grows with age, lower for group a.
  NodeSpec xa{"X_A", {"X_C", "A"}, Family::Gamma, Link::Log, {},
              {1.3862943611198906, {}}, {0.5, {{"X_C", 0.01}, {"A", -0.35}}}};
  NodeSpec xd{"X_D", {"X_C", "A"}, Family::Bernoulli, Link::Logit, {1.9, {{"X_C", 0.02}, {"A", -1.57}}}, {}, {}};
  NodeSpec y{"Y", {"X_A", "X_D", "X_C", "A"}, Family::Bernoulli, Link::Logit,
             {1.53, {{"X_A", 0.5}, {"X_D", -3.0}, {"X_C", -0.08}, {"A", 2.2}}}, {}, {}};
  s.nodes = {a, xc, xa, xd, y};
  return s;
}

}  // namespace fairworld
