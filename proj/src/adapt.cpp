#include "fairworld/adapt.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "fairworld/error.hpp"
#include "fairworld/random.hpp"
#include "fairworld/warp.hpp"

namespace fairworld {

namespace {

std::vector<double> decile_cuts(std::span<const double> values, int bins) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int k = 1; k < bins; ++k) {
    const auto idx = static_cast<std::size_t>(k) * sorted.size() / static_cast<std::size_t>(bins);
    const double c = sorted[std::min(idx, sorted.size() - 1)];
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  // A cut at the minimum would leave the lowest bin empty.
  if (!cuts.empty() && cuts.front() <= sorted.front()) cuts.erase(cuts.begin());
  return cuts;
}

}  // namespace

StrataEstimator StrataEstimator::fit(const std::vector<std::span<const double>>& parents,
                                     const std::vector<bool>& parent_binary, std::span<const double> y,
                                     bool binary, const std::array<std::vector<std::size_t>, 2>& rows_by_group,
                                     int bins, std::size_t min_rows) {
  StrataEstimator est;
  est.binary_ = binary;
  est.min_rows_ = std::max<std::size_t>(min_rows, 1);
  for (std::size_t j = 0; j < parents.size(); ++j) {
    if (parent_binary[j]) {
      est.cuts_.emplace_back();
      est.radix_.push_back(2);
    } else {
      est.cuts_.push_back(decile_cuts(parents[j], bins));
      est.radix_.push_back(static_cast<int>(est.cuts_.back().size()) + 1);
    }
  }

  std::vector<double> pv(parents.size());
  for (std::size_t g = 0; g < 2; ++g) {
    std::map<std::int64_t, std::vector<double>> values;
    for (auto i : rows_by_group[g]) {
      for (std::size_t j = 0; j < parents.size(); ++j) pv[j] = parents[j][i];
      values[est.key(est.cell(pv))].push_back(y[i]);
    }
    for (auto& [k, v] : values) {
      Stratum s;
      s.rows = v.size();
      if (binary) {
        for (double x : v) s.positives += x > 0.5 ? 1.0 : 0.0;
      } else {
        s.distribution = EmpiricalDistribution(std::move(v));
      }
      est.strata_[g].emplace(k, std::move(s));
    }
  }
  return est;
}

std::vector<int> StrataEstimator::cell(std::span<const double> parent_values) const {
  std::vector<int> c(parent_values.size());
  for (std::size_t j = 0; j < parent_values.size(); ++j) {
    if (cuts_[j].empty() && radix_[j] == 2) {
      c[j] = parent_values[j] > 0.5 ? 1 : 0;
    } else {
      c[j] = static_cast<int>(std::upper_bound(cuts_[j].begin(), cuts_[j].end(), parent_values[j]) -
                              cuts_[j].begin());
    }
  }
  return c;
}

std::int64_t StrataEstimator::key(const std::vector<int>& cell) const {
  std::int64_t k = 0;
  for (std::size_t j = 0; j < cell.size(); ++j) k = k * radix_[j] + cell[j];
  return k;
}

std::vector<int> StrataEstimator::unkey(std::int64_t key) const {
  std::vector<int> c(radix_.size());
  for (std::size_t j = radix_.size(); j-- > 0;) {
    c[j] = static_cast<int>(key % radix_[j]);
    key /= radix_[j];
  }
  return c;
}

const StrataEstimator::Stratum& StrataEstimator::lookup(int group, const std::vector<int>& cell,
                                                        bool& fallback) const {
  const auto& table = strata_.at(static_cast<std::size_t>(group));
  if (table.empty()) throw DegenerateGroup("no strata fitted for PA group " + std::to_string(group));
  const auto exact = table.find(key(cell));
  if (exact != table.end() && exact->second.rows >= min_rows_) return exact->second;
  fallback = true;
  std::size_t need = min_rows_;
  if (std::none_of(table.begin(), table.end(), [&](const auto& kv) { return kv.second.rows >= need; })) need = 1;
  const Stratum* best = nullptr;
  long best_dist = std::numeric_limits<long>::max();
  for (const auto& [k, s] : table) {
    if (s.rows < need) continue;
    const auto c = unkey(k);
    long d = 0;
    for (std::size_t j = 0; j < c.size(); ++j) d += std::labs(static_cast<long>(c[j] - cell[j]));
    if (d < best_dist) {
      best_dist = d;
      best = &s;
    }
  }
  return *best;
}

nlohmann::json StrataEstimator::to_json() const {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& table : strata_) {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& [k, s] : table) {
      nlohmann::json js{{"key", k}, {"rows", s.rows}};
      if (binary_) {
        js["positives"] = s.positives;
      } else {
        js["distribution"] = s.distribution.to_json();
      }
      jt.push_back(std::move(js));
    }
    groups.push_back(std::move(jt));
  }
  return {{"binary", binary_}, {"min_rows", min_rows_}, {"cuts", cuts_}, {"radix", radix_}, {"strata", groups}};
}

StrataEstimator StrataEstimator::from_json(const nlohmann::json& j) {
  StrataEstimator est;
  est.binary_ = j.at("binary").get<bool>();
  est.min_rows_ = j.at("min_rows").get<std::size_t>();
  est.cuts_ = j.at("cuts").get<std::vector<std::vector<double>>>();
  est.radix_ = j.at("radix").get<std::vector<int>>();
  for (std::size_t g = 0; g < 2; ++g) {
    for (const auto& js : j.at("strata").at(g)) {
      Stratum s;
      s.rows = js.at("rows").get<std::size_t>();
      if (est.binary_) {
        s.positives = js.at("positives").get<double>();
      } else {
        s.distribution = EmpiricalDistribution::from_json(js.at("distribution"));
      }
      est.strata_[g].emplace(js.at("key").get<std::int64_t>(), std::move(s));
    }
  }
  return est;
}

AdaptModel adapt_fit(const Dataset& train, const AdjacencyInfo& adj, const AdaptOptions& opts) {
  if (opts.baseline != kProtectedGroup && opts.baseline != kReferenceGroup) {
    throw ConfigError("adapt baseline must be 0 or 1");
  }
  if (opts.bins < 2) throw ConfigError("adapt bins must be >= 2");
  if (train.pa_column() != adj.protected_node) {
    throw SchemaMismatch("dataset PA column '" + train.pa_column() + "' differs from graph PA '" +
                         adj.protected_node + "'");
  }
  AdaptModel model;
  model.baseline = opts.baseline;
  model.seed = opts.seed;
  model.schema = schema_to_json(train);

  const auto groups = train.groups();
  std::array<std::vector<std::size_t>, 2> rows;
  for (std::size_t i = 0; i < groups.size(); ++i) rows[static_cast<std::size_t>(groups[i])].push_back(i);
  for (int g = 0; g < 2; ++g) {
    if (rows[static_cast<std::size_t>(g)].empty()) {
      throw DegenerateGroup("adapt fit: PA group " + std::to_string(g) + " has no training rows");
    }
  }

  for (const auto& node : adj.descendants_in_order()) {
    if (!train.has_column(node)) throw SchemaMismatch("adapt fit: dataset lacks graph node '" + node + "'");
    AdaptNodeModel m;
    m.node = node;
    m.predictors = adj.non_pa_parents(node);
    std::vector<std::span<const double>> parents;
    std::vector<bool> parent_binary;
    for (const auto& p : m.predictors) {
      if (!train.has_column(p)) throw SchemaMismatch("adapt fit: dataset lacks graph node '" + p + "'");
      parents.push_back(train.values(p));
      parent_binary.push_back(train.column(p).kind == ColumnKind::Binary);
    }
    m.estimator = StrataEstimator::fit(parents, parent_binary, train.values(node),
                                       train.column(node).kind == ColumnKind::Binary, rows, opts.bins,
                                       opts.min_stratum_rows);
    model.nodes.push_back(std::move(m));
  }
  return model;
}

Dataset adapt_apply(const AdaptModel& model, const Dataset& ds, AdaptDiagnostics* diagnostics) {
  if (schema_to_json(ds) != model.schema) throw SchemaMismatch("adapt apply: dataset schema differs from the fitted schema");
  const auto groups = ds.groups();
  std::map<std::string, std::vector<double>> adapted;
  auto current = [&](const std::string& name) -> std::span<const double> {
    const auto it = adapted.find(name);
    return it != adapted.end() ? std::span<const double>(it->second) : ds.values(name);
  };
  AdaptDiagnostics diag;
  for (int g : groups) diag.rows_adapted += g != model.baseline ? 1 : 0;

  for (const auto& m : model.nodes) {
    std::vector<std::span<const double>> orig_parents, new_parents;
    for (const auto& p : m.predictors) {
      orig_parents.push_back(ds.values(p));
      new_parents.push_back(current(p));
    }
    const auto x = ds.values(m.node);
    std::vector<double> out(x.begin(), x.end());
    std::vector<double> po(m.predictors.size()), pn(m.predictors.size());
    std::size_t fallbacks = 0;
    const auto stream = hash_tag(m.node);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (groups[i] == model.baseline) continue;
      for (std::size_t j = 0; j < po.size(); ++j) {
        po[j] = orig_parents[j][i];
        pn[j] = new_parents[j][i];
      }
      bool fb = false;
      const auto& src = m.estimator.lookup(groups[i], m.estimator.cell(po), fb);
      const auto& dst = m.estimator.lookup(model.baseline, m.estimator.cell(pn), fb);
      if (fb) ++fallbacks;
      if (m.estimator.binary()) {
        const double p_src = src.positives / static_cast<double>(src.rows);
        const double p_dst = dst.positives / static_cast<double>(dst.rows);
        const double u = binary_rank(x[i] > 0.5 ? 1 : 0, p_src, counter_uniform(model.seed, stream, i));
        out[i] = u > 1.0 - p_dst ? 1.0 : 0.0;
      } else {
        out[i] = dst.distribution.quantile(src.distribution.cdf(x[i]));
      }
    }
    diag.fallbacks[m.node] = fallbacks;
    adapted[m.node] = std::move(out);
  }
  if (diagnostics) *diagnostics = std::move(diag);

  std::vector<Column> cols = ds.columns();
  for (auto& c : cols) {
    const auto it = adapted.find(c.name);
    if (it != adapted.end()) c.values = std::move(it->second);
  }
  return Dataset(std::move(cols), ds.pa_column(), ds.target_column());
}

nlohmann::json to_json(const AdaptModel& model) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& m : model.nodes) {
    nodes.push_back({{"node", m.node}, {"predictors", m.predictors}, {"estimator", m.estimator.to_json()}});
  }
  return {{"method", "adapt"}, {"baseline", model.baseline}, {"seed", model.seed}, {"schema", model.schema},
          {"nodes", nodes}};
}

AdaptModel adapt_model_from_json(const nlohmann::json& j) {
  AdaptModel model;
  try {
    if (j.at("method").get<std::string>() != "adapt") throw SchemaMismatch("document is not an adapt model");
    model.baseline = j.at("baseline").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.schema = j.at("schema");
    for (const auto& jn : j.at("nodes")) {
      AdaptNodeModel m;
      m.node = jn.at("node").get<std::string>();
      m.predictors = jn.at("predictors").get<std::vector<std::string>>();
      m.estimator = StrataEstimator::from_json(jn.at("estimator"));
      model.nodes.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("malformed adapt model: ") + e.what());
  }
  return model;
}

}  // namespace fairworld
