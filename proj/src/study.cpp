#include "fairworld/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "fairworld/config.hpp"
#include "fairworld/csv.hpp"
#include "fairworld/error.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

namespace {

std::string world_label(const std::string& w) {
  if (w == "real") return "Real";
  if (w == "find") return "FiND";
  if (w == "adapted") return "Adapted";
  if (w == "warped") return "Warped";
  return w;
}

const std::vector<std::string> kPanelMetrics = {"dp", "fpr_balance", "fnr_balance", "ppv_parity", "auc"};

std::optional<double> panel_metric(const FairnessReport& r, const std::string& m) {
  if (m == "dp") return r.dp;
  if (m == "fpr_balance") return r.fpr_balance;
  if (m == "fnr_balance") return r.fnr_balance;
  if (m == "ppv_parity") return r.ppv_parity;
  return r.auc;
}

nlohmann::json describe(std::vector<double> v) {
  if (v.empty()) return {{"n", 0}, {"mean", nullptr}, {"sd", nullptr}, {"lo", nullptr}, {"hi", nullptr}};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(v.begin(), v.end());
  auto pct = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {{"n", v.size()},
          {"mean", mean},
          {"sd", sd},
          {"lo", std::min(mean, pct(0.025))},
          {"hi", std::max(mean, pct(0.975))}};
}

double pooled_gap(const Dataset& train, const Dataset& test) {
  double pos[2] = {0, 0}, cnt[2] = {0, 0};
  for (const auto* d : {&train, &test}) {
    const auto y = d->labels();
    const auto g = d->groups();
    for (std::size_t i = 0; i < y.size(); ++i) {
      pos[g[i]] += y[i];
      cnt[g[i]] += 1;
    }
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw EmptyGroup("base-rate gap needs both PA groups");
  return std::abs(pos[1] / cnt[1] - pos[0] / cnt[0]);
}

std::string iteration_name(int i) {
  std::ostringstream os;
  os << "iter_" << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string fmt3(const nlohmann::json& v) {
  if (v.is_null()) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v.get<double>();
  return os.str();
}

}  // namespace

void read_boost_section(const ConfigFields& parent, const char* key, BoostParams& out) {
  if (!parent.has(key)) return;
  try {
    out = boost_params_from_json(parent.raw(key), out);
  } catch (const ConfigError& e) {
    // boost_params_from_json reports "boost.<field>"; prefix the parent path.
    const auto field = parent.field(key);
    throw ConfigError(field.substr(0, field.size() - std::string(key).size()) + e.what());
  }
}

void read_tuning_section(const ConfigFields& parent, const char* key, TuningConfig& out) {
  if (!parent.has(key)) return;
  const auto t = parent.sub(key);
  t.allow_only({"enabled", "budget", "folds", "depth", "eta"});
  t.read("enabled", out.enabled);
  t.read("budget", out.budget);
  t.read("folds", out.folds);
  if (out.budget < 1) throw ConfigError(t.field("budget") + ": must be >= 1");
  if (out.folds < 2) throw ConfigError(t.field("folds") + ": must be >= 2");
  std::vector<int> depth{out.space.depth_min, out.space.depth_max};
  std::vector<double> eta{out.space.eta_min, out.space.eta_max};
  t.read("depth", depth);
  t.read("eta", eta);
  if (depth.size() != 2 || depth[0] < 1 || depth[1] < depth[0]) {
    throw ConfigError(t.field("depth") + ": expected [min, max] with 1 <= min <= max");
  }
  if (eta.size() != 2 || !(eta[0] > 0.0) || eta[1] < eta[0] || eta[1] > 1.0) {
    throw ConfigError(t.field("eta") + ": expected [min, max] with 0 < min <= max <= 1");
  }
  out.space = {depth[0], depth[1], eta[0], eta[1]};
}

void read_lambda_section(const ConfigFields& parent, const char* key, LambdaSearchOptions& out) {
  if (!parent.has(key)) return;
  const auto l = parent.sub(key);
  l.allow_only({"eps", "grid", "refine_steps"});
  l.read("eps", out.eps);
  l.read("grid", out.grid);
  l.read("refine_steps", out.refine_steps);
  if (!(out.eps > 0.0)) throw ConfigError(l.field("eps") + ": must be > 0");
  if (out.grid.empty()) throw ConfigError(l.field("grid") + ": must not be empty");
  for (std::size_t k = 0; k < out.grid.size(); ++k) {
    if (!(out.grid[k] >= 0.0) || (k > 0 && !(out.grid[k] > out.grid[k - 1]))) {
      throw ConfigError(l.field("grid") + ": must be non-negative and strictly ascending");
    }
  }
  if (out.refine_steps < 0) throw ConfigError(l.field("refine_steps") + ": must be >= 0");
}

void read_curve_section(const ConfigFields& parent, const char* key, CurveOptions& out) {
  if (!parent.has(key)) return;
  const auto c = parent.sub(key);
  c.allow_only({"steps", "ci_level", "bootstrap_replicates"});
  c.read("steps", out.steps);
  c.read("ci_level", out.ci_level);
  c.read("bootstrap_replicates", out.bootstrap_replicates);
  if (out.steps < 1) throw ConfigError(c.field("steps") + ": must be >= 1");
  if (!(out.ci_level > 0.0 && out.ci_level < 1.0)) throw ConfigError(c.field("ci_level") + ": must lie in (0, 1)");
  if (out.bootstrap_replicates < 1) throw ConfigError(c.field("bootstrap_replicates") + ": must be >= 1");
}

void read_panel_section(const ConfigFields& parent, const char* key, PanelOptions& out) {
  if (!parent.has(key)) return;
  const auto p = parent.sub(key);
  p.allow_only({"threshold", "ci_level", "bootstrap_replicates"});
  p.read("threshold", out.threshold);
  p.read("ci_level", out.level);
  p.read("bootstrap_replicates", out.replicates);
  if (!(out.threshold > 0.0 && out.threshold < 1.0)) throw ConfigError(p.field("threshold") + ": must lie in (0, 1)");
  if (!(out.level > 0.0 && out.level < 1.0)) throw ConfigError(p.field("ci_level") + ": must lie in (0, 1)");
  if (out.replicates < 1) throw ConfigError(p.field("bootstrap_replicates") + ": must be >= 1");
}

void read_warp_section(const ConfigFields& parent, const char* key, int& source_group) {
  if (!parent.has(key)) return;
  const auto w = parent.sub(key);
  w.allow_only({"source_group"});
  w.read("source_group", source_group);
  if (source_group != 0 && source_group != 1) throw ConfigError(w.field("source_group") + ": must be 0 or 1");
}

void read_adapt_section(const ConfigFields& parent, const char* key, AdaptOptions& out) {
  if (!parent.has(key)) return;
  const auto a = parent.sub(key);
  a.allow_only({"baseline", "bins", "min_stratum_rows"});
  a.read("baseline", out.baseline);
  a.read("bins", out.bins);
  a.read("min_stratum_rows", out.min_stratum_rows);
  if (out.baseline != 0 && out.baseline != 1) throw ConfigError(a.field("baseline") + ": must be 0 or 1");
  if (out.bins < 2) throw ConfigError(a.field("bins") + ": must be >= 2");
  if (out.min_stratum_rows < 1) throw ConfigError(a.field("min_stratum_rows") + ": must be >= 1");
}

StudyConfig study_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  StudyConfig cfg;
  const ConfigFields f(j, "study");
  f.allow_only({"version", "kind", "scm", "data", "dag", "n", "iterations", "seed", "split", "boost", "tuning",
                "lambda_search", "curve", "panel", "warp", "adapt", "output_dir", "persist_datasets"});

  std::string kind = "simulation";
  f.read("kind", kind);
  if (kind == "simulation") {
    cfg.kind = StudyKind::Simulation;
  } else if (kind == "hmda") {
    cfg.kind = StudyKind::Hmda;
  } else {
    throw ConfigError("study.kind: must be \"simulation\" or \"hmda\"");
  }
  std::string path;
  if (f.has("scm")) {
    f.read("scm", path);
    cfg.scm_path = resolve_path(base_dir, path);
  }
  if (f.has("data")) {
    f.read("data", path);
    cfg.data_path = resolve_path(base_dir, path);
  }
  if (f.has("dag")) {
    f.read("dag", path);
    cfg.dag_path = resolve_path(base_dir, path);
  }
  if (cfg.kind == StudyKind::Hmda && (cfg.data_path.empty() || cfg.dag_path.empty())) {
    throw ConfigError("study.data / study.dag: required for kind \"hmda\"");
  }

  long long n = static_cast<long long>(cfg.n);
  f.read("n", n);
  if (n < 10) throw ConfigError("study.n: must be >= 10");
  cfg.n = static_cast<std::size_t>(n);
  f.read("iterations", cfg.iterations);
  if (cfg.iterations < 1) throw ConfigError("study.iterations: must be >= 1");
  f.read("seed", cfg.seed);

  if (f.has("split")) {
    const auto s = f.sub("split");
    s.allow_only({"train_fraction"});
    s.read("train_fraction", cfg.train_fraction);
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
      throw ConfigError("study.split.train_fraction: must lie in (0, 1)");
    }
  }

  read_boost_section(f, "boost", cfg.boost);
  read_tuning_section(f, "tuning", cfg.tuning);
  read_lambda_section(f, "lambda_search", cfg.lambda_search);
  read_curve_section(f, "curve", cfg.curve);
  read_panel_section(f, "panel", cfg.panel);
  read_warp_section(f, "warp", cfg.warp_source_group);
  read_adapt_section(f, "adapt", cfg.adapt);

  if (f.has("output_dir")) {
    f.read("output_dir", path);
    cfg.output_dir = resolve_path(base_dir, path);
  } else {
    cfg.output_dir = resolve_path(base_dir, "out");
  }
  f.read("persist_datasets", cfg.persist_datasets);
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  return study_config_from_json(read_json_file(path), std::filesystem::absolute(path).parent_path());
}

nlohmann::json to_json(const StudyConfig& cfg) {
  // Output locations are left out so the summary only depends on what was computed.
  nlohmann::json j{{"kind", cfg.kind == StudyKind::Simulation ? "simulation" : "hmda"},
                   {"n", cfg.n},
                   {"iterations", cfg.iterations},
                   {"seed", cfg.seed},
                   {"split", {{"train_fraction", cfg.train_fraction}}},
                   {"boost", to_json(cfg.boost)},
                   {"tuning",
                    {{"enabled", cfg.tuning.enabled},
                     {"budget", cfg.tuning.budget},
                     {"folds", cfg.tuning.folds},
                     {"depth", {cfg.tuning.space.depth_min, cfg.tuning.space.depth_max}},
                     {"eta", {cfg.tuning.space.eta_min, cfg.tuning.space.eta_max}}}},
                   {"lambda_search",
                    {{"eps", cfg.lambda_search.eps},
                     {"grid", cfg.lambda_search.grid},
                     {"refine_steps", cfg.lambda_search.refine_steps}}},
                   {"curve",
                    {{"steps", cfg.curve.steps},
                     {"ci_level", cfg.curve.ci_level},
                     {"bootstrap_replicates", cfg.curve.bootstrap_replicates}}},
                   {"panel",
                    {{"threshold", cfg.panel.threshold},
                     {"ci_level", cfg.panel.level},
                     {"bootstrap_replicates", cfg.panel.replicates}}},
                   {"warp", {{"source_group", cfg.warp_source_group}}},
                   {"adapt",
                    {{"baseline", cfg.adapt.baseline},
                     {"bins", cfg.adapt.bins},
                     {"min_stratum_rows", cfg.adapt.min_stratum_rows}}}};
  if (!cfg.scm_path.empty()) j["scm"] = cfg.scm_path.filename().string();
  if (!cfg.data_path.empty()) j["data"] = cfg.data_path.filename().string();
  if (!cfg.dag_path.empty()) j["dag"] = cfg.dag_path.filename().string();
  return j;
}

nlohmann::json to_json(const IterationResult& r) {
  nlohmann::json j{{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
    return j;
  }
  j["tuning"] = {{"depth", r.depth}, {"eta", r.eta}, {"cv_auc", r.cv_auc}};
  nlohmann::json panels = nlohmann::json::object();
  for (const auto& w : r.worlds) panels[w] = to_json(r.panels.at(w));
  j["panels"] = panels;
  j["base_rate_gap"] = r.base_rate_gap;
  j["lambda_star"] = to_json(r.lambda_star);
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : r.curves) curves.push_back(to_json(c));
  j["curves"] = curves;
  nlohmann::json rel = nlohmann::json::object();
  for (const auto& [w, rr] : r.relations) {
    rel[w] = {{"relation", to_string(rr.relation)}, {"rho", std::isnan(rr.rho) ? nlohmann::json(nullptr) : nlohmann::json(rr.rho)}};
  }
  j["relations"] = rel;
  j["adapt_fallbacks"] = r.adapt_fallbacks;
  return j;
}

IterationResult run_pipeline(const Dataset& real_train, const Dataset& real_test, const Dataset* find_train,
                             const Dataset* find_test, const AdjacencyInfo& adj, const StudyConfig& cfg,
                             std::uint64_t seed, const std::filesystem::path& dataset_dir) {
  IterationResult r;
  r.seed = seed;

  const auto warp = warp_fit(real_train, adj, {cfg.warp_source_group, derive_seed(seed, "warp")});
  AdaptOptions aopts = cfg.adapt;
  aopts.seed = derive_seed(seed, "adapt");
  const auto adapt = adapt_fit(real_train, adj, aopts);
  AdaptDiagnostics dtrain, dtest;
  const auto adapted_train = adapt_apply(adapt, real_train, &dtrain);
  const auto adapted_test = adapt_apply(adapt, real_test, &dtest);
  const auto warped_train = warp_apply(warp, real_train);
  const auto warped_test = warp_apply(warp, real_test);
  for (const auto& [node, k] : dtrain.fallbacks) r.adapt_fallbacks[node] = k + dtest.fallbacks[node];

  std::vector<std::string> names{"real"};
  std::vector<const Dataset*> trains{&real_train}, tests{&real_test};
  if (find_train && find_test) {
    names.emplace_back("find");
    trains.push_back(find_train);
    tests.push_back(find_test);
  }
  names.emplace_back("adapted");
  trains.push_back(&adapted_train);
  tests.push_back(&adapted_test);
  names.emplace_back("warped");
  trains.push_back(&warped_train);
  tests.push_back(&warped_test);
  r.worlds = names;

  if (!dataset_dir.empty()) {
    std::filesystem::create_directories(dataset_dir);
    for (std::size_t k = 0; k < names.size(); ++k) {
      save_csv(*trains[k], dataset_dir / (names[k] + "_train.csv"));
      save_csv(*tests[k], dataset_dir / (names[k] + "_test.csv"));
    }
  }

  BoostParams params = cfg.boost;
  params.seed = derive_seed(seed, "boost");
  params.lambda_fair = 0.0;
  if (cfg.tuning.enabled) {
    const auto tuned = tune(real_train, cfg.tuning.space, cfg.tuning.budget, cfg.tuning.folds,
                            derive_seed(seed, "tune"), params);
    params.depth = tuned.depth;
    params.eta = tuned.eta;
    r.cv_auc = tuned.cv_auc;
  }
  r.depth = params.depth;
  r.eta = params.eta;

  for (std::size_t k = 0; k < names.size(); ++k) {
    r.base_rate_gap[names[k]] = pooled_gap(*trains[k], *tests[k]);
    const auto model = train(*trains[k], params);
    const auto probs = predict_proba(model, *tests[k]);
    PanelOptions popts = cfg.panel;
    popts.seed = derive_seed(seed, "panel", k);
    r.panels[names[k]] = fairness_panel(probs, tests[k]->labels(), tests[k]->groups(), popts);
  }

  // An exhausted grid falls back to the best achieved lambda; the result
  // records satisfied = false.
  r.lambda_star = search_lambda_star(real_train, real_test, params, cfg.lambda_search);

  std::vector<NamedDataset> worlds;
  for (std::size_t k = 0; k < names.size(); ++k) worlds.emplace_back(names[k], *tests[k]);
  CurveOptions copts = cfg.curve;
  copts.bootstrap_seed = derive_seed(seed, "curve");
  r.curves = tradeoff_curve(real_train, worlds, r.lambda_star.lambda_star, params, copts);
  for (const auto& c : r.curves) r.relations[c.world] = relation_direction(c);
  r.ok = true;
  return r;
}

namespace {

IterationResult guarded(int index, std::uint64_t seed, const std::function<IterationResult()>& body) {
  IterationResult r;
  try {
    r = body();
  } catch (const Error& e) {
    r = IterationResult{};
    r.error_kind = e.kind();
    r.error_message = e.what();
  } catch (const std::exception& e) {
    r = IterationResult{};
    r.error_kind = "InternalError";
    r.error_message = e.what();
  }
  r.index = index;
  r.seed = seed;
  return r;
}

}  // namespace

StudyResult run_simulation_study(const StudyConfig& cfg, int jobs, const ProgressFn& progress) {
  if (cfg.kind != StudyKind::Simulation) throw ConfigError("study.kind: expected \"simulation\"");
  const auto spec = cfg.scm_path.empty() ? default_credit_scm() : load_scm(cfg.scm_path.string());
  const auto adj = adjacency_from_scm(spec);

  StudyResult result;
  result.config = cfg;
  result.iterations.resize(static_cast<std::size_t>(cfg.iterations));
  const int threads = std::max(1, jobs);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (int i = 0; i < cfg.iterations; ++i) {
    const auto seed = derive_seed(cfg.seed, "iteration", static_cast<std::uint64_t>(i));
    auto r = guarded(i, seed, [&] {
      const auto [real, find] = paired_worlds(spec, cfg.n, derive_seed(seed, "simulate"));
      const auto [train_rows, test_rows] = split_indices(cfg.n, {cfg.train_fraction, derive_seed(seed, "split")});
      const auto real_train = real.take_rows(train_rows), real_test = real.take_rows(test_rows);
      const auto find_train = find.take_rows(train_rows), find_test = find.take_rows(test_rows);
      const auto dir = cfg.persist_datasets ? cfg.output_dir / "datasets" / iteration_name(i) : std::filesystem::path{};
      return run_pipeline(real_train, real_test, &find_train, &find_test, adj, cfg, seed, dir);
    });
    result.iterations[static_cast<std::size_t>(i)] = std::move(r);
    if (progress) {
#pragma omp critical(fairworld_progress)
      progress(result.iterations[static_cast<std::size_t>(i)]);
    }
  }
  result.summary = summarize(cfg, result.iterations);
  return result;
}

StudyResult run_hmda_study(const StudyConfig& cfg, const ProgressFn& progress) {
  if (cfg.kind != StudyKind::Hmda) throw ConfigError("study.kind: expected \"hmda\"");
  if (!std::filesystem::exists(cfg.data_path)) throw ConfigError("study.data: file '" + cfg.data_path.string() + "' does not exist");
  const auto data = load_csv(cfg.data_path);
  const auto adj = load_adjacency(cfg.dag_path.string());

  StudyResult result;
  result.config = cfg;
  const auto seed = derive_seed(cfg.seed, "iteration", 0);
  auto r = guarded(0, seed, [&] {
    const auto [train_part, test_part] = split(data, {cfg.train_fraction, derive_seed(seed, "split")});
    const auto dir = cfg.persist_datasets ? cfg.output_dir / "datasets" / iteration_name(0) : std::filesystem::path{};
    return run_pipeline(train_part, test_part, nullptr, nullptr, adj, cfg, seed, dir);
  });
  if (progress) progress(r);
  result.iterations.push_back(std::move(r));
  result.summary = summarize(cfg, result.iterations);
  return result;
}

StudyResult run_study(const StudyConfig& cfg, int jobs, const ProgressFn& progress) {
  if (!cfg.scm_path.empty() && !std::filesystem::exists(cfg.scm_path)) {
    throw ConfigError("study.scm: file '" + cfg.scm_path.string() + "' does not exist");
  }
  return cfg.kind == StudyKind::Simulation ? run_simulation_study(cfg, jobs, progress) : run_hmda_study(cfg, progress);
}

nlohmann::json summarize(const StudyConfig& cfg, const std::vector<IterationResult>& iterations) {
  std::vector<std::string> worlds;
  for (const auto& it : iterations) {
    if (it.ok) {
      worlds = it.worlds;
      break;
    }
  }

  nlohmann::json table = nlohmann::json::object();
  nlohmann::json gaps = nlohmann::json::object();
  nlohmann::json relations = nlohmann::json::object();
  nlohmann::json undefined = nlohmann::json::object();
  for (const auto& w : worlds) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& m : kPanelMetrics) {
      std::vector<double> v;
      std::size_t missing = 0;
      for (const auto& it : iterations) {
        if (!it.ok) continue;
        const auto x = panel_metric(it.panels.at(w), m);
        if (x) {
          v.push_back(*x);
        } else {
          ++missing;
        }
      }
      row[m] = describe(v);
      if (missing) undefined[w][m] = missing;
    }
    table[w] = row;

    std::vector<double> g, rho;
    std::map<std::string, int> tally{{"aligned", 0}, {"tradeoff", 0}, {"flat", 0}};
    for (const auto& it : iterations) {
      if (!it.ok) continue;
      g.push_back(it.base_rate_gap.at(w));
      const auto& rr = it.relations.at(w);
      ++tally[to_string(rr.relation)];
      if (!std::isnan(rr.rho)) rho.push_back(rr.rho);
    }
    gaps[w] = describe(g);
    relations[w] = {{"aligned", tally["aligned"]}, {"tradeoff", tally["tradeoff"]}, {"flat", tally["flat"]},
                    {"rho", describe(rho)}};
  }

  int pattern = 0, completed = 0, satisfied = 0;
  std::vector<double> lambdas, achieved, depths, etas;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& it : iterations) {
    if (!it.ok) {
      failures.push_back({{"iteration", it.index}, {"kind", it.error_kind}, {"message", it.error_message}});
      continue;
    }
    ++completed;
    bool match = true;
    for (const auto& w : worlds) {
      const auto want = w == "real" ? Relation::Tradeoff : Relation::Aligned;
      match = match && it.relations.at(w).relation == want;
    }
    pattern += match ? 1 : 0;
    satisfied += it.lambda_star.satisfied ? 1 : 0;
    lambdas.push_back(it.lambda_star.lambda_star);
    achieved.push_back(it.lambda_star.achieved_disparity);
    depths.push_back(it.depth);
    etas.push_back(it.eta);
  }

  return {{"version", 1},
          {"config", to_json(cfg)},
          {"iterations_requested", iterations.size()},
          {"iterations_completed", completed},
          {"worlds", worlds},
          {"table", table},
          {"undefined_entries", undefined},
          {"base_rate_gap", gaps},
          {"relations", relations},
          {"pattern_iterations", pattern},
          {"lambda_star",
           {{"satisfied", satisfied}, {"value", describe(lambdas)}, {"achieved_disparity", describe(achieved)}}},
          {"tuning", {{"depth", describe(depths)}, {"eta", describe(etas)}}},
          {"failures", failures}};
}

void write_study_outputs(const StudyResult& result) {
  const auto& dir = result.config.output_dir;
  std::filesystem::create_directories(dir / "iterations");
  write_text(dir / "summary.json", result.summary.dump(2) + "\n");

  std::ostringstream table;
  table << "world,metric,mean,sd,lo,hi,n\n";
  for (const auto& w : result.summary.at("worlds")) {
    for (const auto& m : kPanelMetrics) {
      const auto& s = result.summary.at("table").at(w.get<std::string>()).at(m);
      auto cell = [&](const char* k) { return s.at(k).is_null() ? std::string("NA") : csv::format_double(s.at(k).get<double>()); };
      table << w.get<std::string>() << ',' << m << ',' << cell("mean") << ',' << cell("sd") << ',' << cell("lo") << ','
            << cell("hi") << ',' << s.at("n").get<std::size_t>() << '\n';
    }
  }
  write_text(dir / "table.csv", table.str());

  std::ostringstream curves;
  curves << "iteration," << curves_csv_header() << '\n';
  for (const auto& it : result.iterations) {
    write_text(dir / "iterations" / (iteration_name(it.index) + ".json"), to_json(it).dump(2) + "\n");
    for (const auto& c : it.curves) curves << curve_csv_rows(c, std::to_string(it.index) + ",");
  }
  write_text(dir / "curves.csv", curves.str());
}

std::string render_report(const nlohmann::json& summary, const std::string& format) {
  std::ostringstream os;
  try {
    const auto& worlds = summary.at("worlds");
    const auto& table = summary.at("table");
    if (format == "md") {
      const bool sd = summary.at("iterations_completed").get<int>() > 1;
      os << "| World | DP | FPR | FNR | PPV | AUC |\n";
      os << "|---|---|---|---|---|---|\n";
      for (const auto& w : worlds) {
        const auto name = w.get<std::string>();
        os << "| " << world_label(name);
        for (const auto& m : kPanelMetrics) {
          const auto& s = table.at(name).at(m);
          os << " | " << fmt3(s.at("mean"));
          if (sd) os << " (" << fmt3(s.at("sd")) << ")";
        }
        os << " |\n";
      }
      os << "\n| World | aligned | tradeoff | flat |\n|---|---|---|---|\n";
      for (const auto& w : worlds) {
        const auto name = w.get<std::string>();
        const auto& r = summary.at("relations").at(name);
        os << "| " << world_label(name) << " | " << r.at("aligned") << " | " << r.at("tradeoff") << " | "
           << r.at("flat") << " |\n";
      }
      const auto& ls = summary.at("lambda_star");
      os << "\nlambda* met eps in " << ls.at("satisfied") << " of " << summary.at("iterations_completed")
         << " completed iterations; mean lambda* " << fmt3(ls.at("value").at("mean")) << ".\n";
      if (sd) os << "\nCells: mean over iterations (sd).\n";
    } else if (format == "csv") {
      os << "world";
      for (const auto& m : kPanelMetrics) os << ',' << m << "_mean," << m << "_sd," << m << "_lo," << m << "_hi";
      os << ",aligned,tradeoff,flat\n";
      for (const auto& w : worlds) {
        const auto name = w.get<std::string>();
        os << name;
        for (const auto& m : kPanelMetrics) {
          const auto& s = table.at(name).at(m);
          for (const char* k : {"mean", "sd", "lo", "hi"}) {
            os << ',' << (s.at(k).is_null() ? std::string("NA") : csv::format_double(s.at(k).get<double>()));
          }
        }
        const auto& r = summary.at("relations").at(name);
        os << ',' << r.at("aligned") << ',' << r.at("tradeoff") << ',' << r.at("flat") << '\n';
      }
    } else {
      throw ConfigError("report format must be \"md\" or \"csv\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("not a study summary: ") + e.what());
  }
  return os.str();
}

}  // namespace fairworld
