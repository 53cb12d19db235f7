#include "fairworld/warp.hpp"

#include <algorithm>
#include <map>

#include "fairworld/error.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

namespace {

std::string to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::None: return "none";
    case ResidualKind::Ratio: return "ratio";
    case ResidualKind::Difference: return "difference";
  }
  return "none";
}

ResidualKind residual_kind_from_string(const std::string& s) {
  if (s == "none") return ResidualKind::None;
  if (s == "ratio") return ResidualKind::Ratio;
  if (s == "difference") return ResidualKind::Difference;
  throw SchemaMismatch("unknown residual kind '" + s + "'");
}

double residual_of(ResidualKind k, double x, double mu) { return k == ResidualKind::Ratio ? x / mu : x - mu; }
double value_of(ResidualKind k, double r, double mu) { return k == ResidualKind::Ratio ? mu * r : mu + r; }

std::vector<double> row_of(const std::vector<std::span<const double>>& cols, std::size_t i) {
  std::vector<double> x(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) x[j] = cols[j][i];
  return x;
}

}  // namespace

double binary_rank(int y, double p, double v) noexcept { return y ? (1.0 - p) + v * p : v * (1.0 - p); }

WarpModel warp_fit(const Dataset& train, const AdjacencyInfo& adj, const WarpOptions& opts) {
  if (opts.source_group != kProtectedGroup && opts.source_group != kReferenceGroup) {
    throw ConfigError("warp source group must be 0 or 1");
  }
  if (train.pa_column() != adj.protected_node) {
    throw SchemaMismatch("dataset PA column '" + train.pa_column() + "' differs from graph PA '" +
                         adj.protected_node + "'");
  }
  WarpModel model;
  model.source_group = opts.source_group;
  model.seed = opts.seed;
  model.schema = schema_to_json(train);

  const auto groups = train.groups();
  std::array<std::vector<std::size_t>, 2> rows;
  for (std::size_t i = 0; i < groups.size(); ++i) rows[static_cast<std::size_t>(groups[i])].push_back(i);
  for (int g = 0; g < 2; ++g) {
    if (rows[static_cast<std::size_t>(g)].empty()) {
      throw DegenerateGroup("warp fit: PA group " + std::to_string(g) + " has no training rows");
    }
  }

  for (const auto& node : adj.descendants_in_order()) {
    if (!train.has_column(node)) throw SchemaMismatch("warp fit: dataset lacks graph node '" + node + "'");
    WarpNodeModel m;
    m.node = node;
    m.predictors = adj.non_pa_parents(node);
    for (const auto& p : m.predictors) {
      if (!train.has_column(p)) throw SchemaMismatch("warp fit: dataset lacks graph node '" + p + "'");
    }
    const auto y = train.values(node);
    m.binary = train.column(node).kind == ColumnKind::Binary;
    GlmKind kind = GlmKind::Logistic;
    if (!m.binary) {
      const bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
      kind = positive ? GlmKind::LogLinear : GlmKind::Linear;
      m.residual = positive ? ResidualKind::Ratio : ResidualKind::Difference;
    }

    for (std::size_t g = 0; g < 2; ++g) {
      std::vector<std::vector<double>> cols;
      for (const auto& p : m.predictors) {
        const auto v = train.values(p);
        std::vector<double> c;
        c.reserve(rows[g].size());
        for (auto i : rows[g]) c.push_back(v[i]);
        cols.push_back(std::move(c));
      }
      std::vector<double> yg;
      yg.reserve(rows[g].size());
      for (auto i : rows[g]) yg.push_back(y[i]);
      try {
        m.location[g] = fit_glm(kind, cols, yg);
      } catch (const DegenerateGroup& e) {
        throw DegenerateGroup("warp fit: node '" + node + "', PA group " + std::to_string(g) + ": " + e.what());
      }
      if (!m.binary) {
        std::vector<double> res(yg.size());
        std::vector<double> x(cols.size());
        for (std::size_t k = 0; k < yg.size(); ++k) {
          for (std::size_t j = 0; j < cols.size(); ++j) x[j] = cols[j][k];
          res[k] = residual_of(m.residual, yg[k], m.location[g].mean(x));
        }
        m.residuals[g] = EmpiricalDistribution(std::move(res));
      }
    }
    model.nodes.push_back(std::move(m));
  }
  return model;
}

Dataset warp_apply(const WarpModel& model, const Dataset& ds) {
  if (schema_to_json(ds) != model.schema) throw SchemaMismatch("warp apply: dataset schema differs from the fitted schema");
  const auto groups = ds.groups();
  const auto src = static_cast<std::size_t>(model.source_group);
  const auto dst = static_cast<std::size_t>(model.target_group());

  std::map<std::string, std::vector<double>> warped;
  auto current = [&](const std::string& name) -> std::span<const double> {
    const auto it = warped.find(name);
    return it != warped.end() ? std::span<const double>(it->second) : ds.values(name);
  };

  for (const auto& m : model.nodes) {
    std::vector<std::span<const double>> orig_parents, new_parents;
    for (const auto& p : m.predictors) {
      orig_parents.push_back(ds.values(p));
      new_parents.push_back(current(p));
    }
    const auto x = ds.values(m.node);
    std::vector<double> out(x.begin(), x.end());
    const auto stream = hash_tag(m.node);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (static_cast<std::size_t>(groups[i]) != src) continue;
      const auto xo = row_of(orig_parents, i);
      const auto xn = row_of(new_parents, i);
      if (m.binary) {
        const double p_src = m.location[src].mean(xo);
        const double p_dst = m.location[dst].mean(xn);
        const double u = binary_rank(x[i] > 0.5 ? 1 : 0, p_src, counter_uniform(model.seed, stream, i));
        out[i] = u > 1.0 - p_dst ? 1.0 : 0.0;
      } else {
        const double r = residual_of(m.residual, x[i], m.location[src].mean(xo));
        const double u = m.residuals[src].cdf(r);
        out[i] = value_of(m.residual, m.residuals[dst].quantile(u), m.location[dst].mean(xn));
      }
    }
    warped[m.node] = std::move(out);
  }

  std::vector<Column> cols = ds.columns();
  for (auto& c : cols) {
    const auto it = warped.find(c.name);
    if (it != warped.end()) c.values = std::move(it->second);
  }
  return Dataset(std::move(cols), ds.pa_column(), ds.target_column());
}

nlohmann::json to_json(const WarpModel& model) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& m : model.nodes) {
    nlohmann::json jn{{"node", m.node},
                      {"predictors", m.predictors},
                      {"binary", m.binary},
                      {"residual", to_string(m.residual)},
                      {"location", {m.location[0].to_json(), m.location[1].to_json()}}};
    if (!m.binary) jn["residuals"] = {m.residuals[0].to_json(), m.residuals[1].to_json()};
    nodes.push_back(std::move(jn));
  }
  return {{"method", "warp"},
          {"source_group", model.source_group},
          {"seed", model.seed},
          {"schema", model.schema},
          {"nodes", nodes}};
}

WarpModel warp_model_from_json(const nlohmann::json& j) {
  WarpModel model;
  try {
    if (j.at("method").get<std::string>() != "warp") throw SchemaMismatch("document is not a warp model");
    model.source_group = j.at("source_group").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.schema = j.at("schema");
    for (const auto& jn : j.at("nodes")) {
      WarpNodeModel m;
      m.node = jn.at("node").get<std::string>();
      m.predictors = jn.at("predictors").get<std::vector<std::string>>();
      m.binary = jn.at("binary").get<bool>();
      m.residual = residual_kind_from_string(jn.at("residual").get<std::string>());
      for (std::size_t g = 0; g < 2; ++g) {
        m.location[g] = GlmFit::from_json(jn.at("location").at(g));
        if (!m.binary) m.residuals[g] = EmpiricalDistribution::from_json(jn.at("residuals").at(g));
      }
      model.nodes.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("malformed warp model: ") + e.what());
  }
  return model;
}

}  // namespace fairworld
