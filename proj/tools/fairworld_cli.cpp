// fairworld: simulate, pre-process, train, trace trade-offs and run studies.
// Every subcommand takes a JSON config; relative paths in it are resolved
// against the config file's directory. Errors go to stderr as one JSON object.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/adapt.hpp"
#include "fairworld/boost.hpp"
#include "fairworld/config.hpp"
#include "fairworld/csv.hpp"
#include "fairworld/dataset.hpp"
#include "fairworld/error.hpp"
#include "fairworld/graph.hpp"
#include "fairworld/hmda.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/scm.hpp"
#include "fairworld/study.hpp"
#include "fairworld/tradeoff.hpp"
#include "fairworld/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fairworld;

namespace {

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Config:
      return 2;
    case ErrorClass::Data:
      return 3;
    case ErrorClass::Numeric:
      return 4;
  }
  return 4;
}

const char* class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Config:
      return "config";
    case ErrorClass::Data:
      return "data";
    case ErrorClass::Numeric:
      return "numeric";
  }
  return "numeric";
}

int report_error(const std::string& kind, ErrorClass cls, const std::string& message) {
  const int code = exit_code(cls);
  std::cerr << json{{"error", kind}, {"class", class_name(cls)}, {"message", message}, {"exit_code", code}}.dump()
            << '\n';
  return code;
}

struct LoadedConfig {
  json doc;
  fs::path base;
};

LoadedConfig load_config(const std::string& path) {
  return {read_json_file(path), fs::absolute(path).parent_path()};
}

fs::path out_dir(const ConfigFields& f, const fs::path& base, const std::string& override_dir) {
  if (!override_dir.empty()) return fs::absolute(override_dir);
  std::string dir = "out";
  f.read("output_dir", dir);
  return resolve_path(base, dir);
}

fs::path existing(const ConfigFields& f, const char* key, const fs::path& base) {
  const auto p = resolve_path(base, f.require<std::string>(key));
  if (!fs::exists(p)) throw ConfigError(f.field(key) + ": file '" + p.string() + "' does not exist");
  return p;
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// --- simulate -------------------------------------------------------------

int cmd_simulate(const std::string& config, const std::string& world_flag, const std::string& out_flag) {
  const auto cfg = load_config(config);
  const ConfigFields f(cfg.doc, "simulate");
  f.allow_only({"scm", "n", "seed", "world", "output_dir"});
  const auto spec = f.has("scm") ? load_scm(existing(f, "scm", cfg.base).string()) : default_credit_scm();
  long long n = 10000;
  f.read("n", n);
  if (n < 1) throw ConfigError("simulate.n: must be >= 1");
  std::uint64_t seed = 0;
  f.read("seed", seed);
  std::string world = "real";
  f.read("world", world);
  if (!world_flag.empty()) world = world_flag;
  const auto dir = out_dir(f, cfg.base, out_flag);
  fs::create_directories(dir);

  json written = json::array();
  auto emit = [&](const Dataset& ds, const std::string& name) {
    const auto path = dir / (name + ".csv");
    save_csv(ds, path);
    written.push_back(path.string());
  };
  if (world == "both") {
    const auto [real, find] = paired_worlds(spec, static_cast<std::size_t>(n), seed);
    emit(real, "real");
    emit(find, "find");
  } else if (world == "real" || world == "find") {
    const auto kind = world == "real" ? WorldKind::Real : WorldKind::FiND;
    emit(simulate(spec, kind, static_cast<std::size_t>(n), seed), world);
  } else {
    throw ConfigError("simulate.world: must be \"real\", \"find\" or \"both\"");
  }
  std::cout << json{{"written", written}}.dump() << '\n';
  return 0;
}

// --- preprocess -----------------------------------------------------------

AdjacencyInfo adjacency_for(const ConfigFields& f, const fs::path& base) {
  if (f.has("dag")) return load_adjacency(existing(f, "dag", base).string());
  if (f.has("scm")) return adjacency_from_scm(load_scm(existing(f, "scm", base).string()));
  return adjacency_from_scm(default_credit_scm());
}

int cmd_preprocess(const std::string& config, const std::string& out_flag) {
  const auto cfg = load_config(config);
  const ConfigFields f(cfg.doc, "preprocess");
  f.allow_only({"method", "train", "apply", "dag", "scm", "seed", "warp", "adapt", "output_dir"});
  const auto method = f.require<std::string>("method");
  if (method != "warp" && method != "adapt") throw ConfigError("preprocess.method: must be \"warp\" or \"adapt\"");
  const auto train_path = existing(f, "train", cfg.base);
  std::vector<std::string> apply_rel;
  f.read("apply", apply_rel);
  std::vector<fs::path> apply{train_path};
  for (const auto& p : apply_rel) {
    const auto abs = resolve_path(cfg.base, p);
    if (!fs::exists(abs)) throw ConfigError("preprocess.apply: file '" + abs.string() + "' does not exist");
    apply.push_back(abs);
  }
  std::uint64_t seed = 0;
  f.read("seed", seed);
  const auto adj = adjacency_for(f, cfg.base);
  const auto dir = out_dir(f, cfg.base, out_flag);
  const auto train_ds = load_csv(train_path);

  json written = json::array();
  auto out_path = [&](const fs::path& in) { return dir / (in.stem().string() + "_" + method + ".csv"); };
  if (method == "warp") {
    int source = kProtectedGroup;
    read_warp_section(f, "warp", source);
    const auto model = warp_fit(train_ds, adj, {source, seed});
    write_json(dir / "warp_model.json", to_json(model));
    for (const auto& p : apply) {
      save_csv(warp_apply(model, load_csv(p)), out_path(p));
      written.push_back(out_path(p).string());
    }
  } else {
    AdaptOptions opts;
    read_adapt_section(f, "adapt", opts);
    opts.seed = seed;
    const auto model = adapt_fit(train_ds, adj, opts);
    write_json(dir / "adapt_model.json", to_json(model));
    json diagnostics = json::object();
    for (const auto& p : apply) {
      AdaptDiagnostics d;
      save_csv(adapt_apply(model, load_csv(p), &d), out_path(p));
      written.push_back(out_path(p).string());
      diagnostics[p.filename().string()] = {{"rows_adapted", d.rows_adapted}, {"fallbacks", d.fallbacks}};
    }
    write_json(dir / "adapt_diagnostics.json", diagnostics);
  }
  std::cout << json{{"written", written}}.dump() << '\n';
  return 0;
}

// --- train ----------------------------------------------------------------

int cmd_train(const std::string& config, const std::string& out_flag) {
  const auto cfg = load_config(config);
  const ConfigFields f(cfg.doc, "train");
  f.allow_only({"train", "test", "boost", "tuning", "panel", "seed", "output_dir"});
  const auto train_ds = load_csv(existing(f, "train", cfg.base));
  BoostParams params;
  read_boost_section(f, "boost", params);
  TuningConfig tuning;
  tuning.enabled = false;
  read_tuning_section(f, "tuning", tuning);
  PanelOptions panel;
  read_panel_section(f, "panel", panel);
  std::uint64_t seed = 0;
  f.read("seed", seed);
  const auto dir = out_dir(f, cfg.base, out_flag);

  json out{{"model", (dir / "model.json").string()}};
  if (tuning.enabled) {
    const auto tuned = tune(train_ds, tuning.space, tuning.budget, tuning.folds, seed, params);
    params.depth = tuned.depth;
    params.eta = tuned.eta;
    json trials = json::array();
    for (const auto& t : tuned.trials) trials.push_back({{"depth", t.depth}, {"eta", t.eta}, {"cv_auc", t.cv_auc}});
    write_json(dir / "tuning.json", {{"depth", tuned.depth}, {"eta", tuned.eta}, {"cv_auc", tuned.cv_auc}, {"trials", trials}});
  }
  const auto model = train(train_ds, params);
  write_json(dir / "model.json", model_to_json(model));

  if (f.has("test")) {
    const auto test_ds = load_csv(existing(f, "test", cfg.base));
    const auto probs = predict_proba(model, test_ds);
    std::string preds = "prob\n";
    for (double p : probs) preds += csv::format_double(p) + "\n";
    write_text(dir / "predictions.csv", preds);
    panel.seed = seed;
    const auto report = fairness_panel(probs, test_ds.labels(), test_ds.groups(), panel);
    write_json(dir / "panel.json", to_json(report));
    out["panel"] = to_json(report);
  }
  std::cout << out.dump() << '\n';
  return 0;
}

// --- tradeoff -------------------------------------------------------------

int cmd_tradeoff(const std::string& config, const std::string& out_flag) {
  const auto cfg = load_config(config);
  const ConfigFields f(cfg.doc, "tradeoff");
  f.allow_only({"train", "test", "worlds", "boost", "lambda_search", "curve", "seed", "strict", "output_dir"});
  const auto train_ds = load_csv(existing(f, "train", cfg.base));
  const auto test_ds = load_csv(existing(f, "test", cfg.base));
  BoostParams params;
  read_boost_section(f, "boost", params);
  params.lambda_fair = 0.0;
  LambdaSearchOptions search;
  read_lambda_section(f, "lambda_search", search);
  CurveOptions curve;
  read_curve_section(f, "curve", curve);
  std::uint64_t seed = 0;
  f.read("seed", seed);
  curve.bootstrap_seed = seed;
  bool strict = false;
  f.read("strict", strict);
  const auto dir = out_dir(f, cfg.base, out_flag);

  std::vector<NamedDataset> worlds{{"real", test_ds}};
  if (f.has("worlds")) {
    std::map<std::string, std::string> extra;
    f.read("worlds", extra);
    for (const auto& [name, p] : extra) {
      const auto abs = resolve_path(cfg.base, p);
      if (!fs::exists(abs)) throw ConfigError("tradeoff.worlds." + name + ": file '" + abs.string() + "' does not exist");
      worlds.emplace_back(name, load_csv(abs));
    }
  }

  const auto star = strict ? find_lambda_star(train_ds, test_ds, params, search)
                           : search_lambda_star(train_ds, test_ds, params, search);
  write_json(dir / "lambda_star.json", to_json(star));
  const auto curves = tradeoff_curve(train_ds, worlds, star.lambda_star, params, curve);
  std::string rows = curves_csv_header() + "\n";
  json cj = json::array();
  json relations = json::object();
  for (const auto& c : curves) {
    rows += curve_csv_rows(c);
    cj.push_back(to_json(c));
    const auto r = relation_direction(c);
    relations[c.world] = {{"relation", to_string(r.relation)}, {"rho", std::isnan(r.rho) ? json(nullptr) : json(r.rho)}};
  }
  write_text(dir / "curves.csv", rows);
  write_json(dir / "curves.json", {{"curves", cj}, {"relations", relations}});
  std::cout << json{{"lambda_star", star.lambda_star}, {"satisfied", star.satisfied}, {"relations", relations}}.dump()
            << '\n';
  return 0;
}

// --- study ----------------------------------------------------------------

int cmd_study(const std::string& config, int jobs, const std::string& out_flag, bool persist, bool quiet) {
  auto cfg = load_study_config(config);
  if (!out_flag.empty()) cfg.output_dir = fs::absolute(out_flag);
  if (persist) cfg.persist_datasets = true;
  ProgressFn progress;
  if (!quiet) {
    progress = [&](const IterationResult& r) {
      std::cerr << "iteration " << r.index << (r.ok ? " done" : " failed: " + r.error_kind + ": " + r.error_message)
                << '\n';
    };
  }
  const auto result = run_study(cfg, jobs, progress);
  write_study_outputs(result);
  std::cout << json{{"output_dir", cfg.output_dir.string()},
                    {"iterations_completed", result.summary.at("iterations_completed")},
                    {"pattern_iterations", result.summary.at("pattern_iterations")}}
                   .dump()
            << '\n';
  if (result.summary.at("iterations_completed").get<int>() == 0) {
    const auto& first = result.iterations.front();
    return report_error(first.error_kind, ErrorClass::Numeric, "every iteration failed; first: " + first.error_message);
  }
  return 0;
}

// --- hmda -----------------------------------------------------------------

int cmd_hmda_prepare(const std::string& config, const std::string& out_flag) {
  const auto cfg = load_config(config);
  const ConfigFields f(cfg.doc, "hmda");
  f.allow_only({"input", "rules", "output", "output_dir"});
  const auto input = existing(f, "input", cfg.base);
  const auto rules = load_hmda_rules(existing(f, "rules", cfg.base));
  const auto dir = out_dir(f, cfg.base, out_flag);
  std::string name = "hmda.csv";
  f.read("output", name);
  const auto result = hmda_encode(read_raw_csv(input), rules);
  const auto path = dir / name;
  fs::create_directories(dir);
  save_csv(result.data, path);
  write_json(dir / "encode_report.json", to_json(result));
  auto report = to_json(result);
  report["written"] = path.string();
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_hmda_fixture(const std::string& out, std::uint64_t seed, std::size_t filtered) {
  HmdaFixtureSpec spec;
  spec.seed = seed;
  spec.filtered_rows = filtered;
  const fs::path path = fs::absolute(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto raw = hmda_fixture(spec);
  write_raw_csv(raw, path);
  std::cout << json{{"written", path.string()}, {"rows", raw.rows.size()}}.dump() << '\n';
  return 0;
}

// --- report ---------------------------------------------------------------

int cmd_report(const std::string& in, const std::string& format, const std::string& out) {
  json summary;
  {
    std::ifstream f(in);
    if (!f) throw ConfigError("report --in: cannot open '" + in + "'");
    try {
      summary = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ParseError(in + ": " + e.what());
    }
  }
  const auto text = render_report(summary, format);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(fs::absolute(out), text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual fairness worlds: simulation, pre-processing and fairness-performance trade-offs"};
  app.require_subcommand(1);

  std::string config, out, world, in, format = "md";
  int jobs = 1;
  bool persist = false, quiet = false;
  std::uint64_t seed = 2022;
  std::size_t filtered = HmdaFixtureSpec{}.filtered_rows;

  auto* sim = app.add_subcommand("simulate", "Sample a real or FiND world from an SCM");
  sim->add_option("--config", config, "JSON config")->required();
  sim->add_option("--world", world, "real | find | both (overrides the config)");
  sim->add_option("--out", out, "Output directory (overrides the config)");

  auto* pre = app.add_subcommand("preprocess", "Fit warp or adapt on a train CSV and apply it");
  pre->add_option("--config", config, "JSON config")->required();
  pre->add_option("--out", out, "Output directory");

  auto* trn = app.add_subcommand("train", "Train a boosted model and evaluate the fairness panel");
  trn->add_option("--config", config, "JSON config")->required();
  trn->add_option("--out", out, "Output directory");

  auto* trd = app.add_subcommand("tradeoff", "Search lambda* and trace fairness/AUC curves");
  trd->add_option("--config", config, "JSON config")->required();
  trd->add_option("--out", out, "Output directory");

  auto* std_ = app.add_subcommand("study", "Run the repeated simulation study or the HMDA pipeline");
  std_->add_option("--config", config, "JSON config")->required();
  std_->add_option("--jobs", jobs, "Iterations run concurrently")->check(CLI::PositiveNumber);
  std_->add_option("--out", out, "Output directory");
  std_->add_flag("--persist-datasets", persist, "Also write every iteration's datasets");
  std_->add_flag("--quiet", quiet, "No progress lines on stderr");

  auto* hp = app.add_subcommand("hmda-prepare", "Encode a raw loan-level CSV with recoding rules");
  hp->add_option("--config", config, "JSON config")->required();
  hp->add_option("--out", out, "Output directory");

  auto* hf = app.add_subcommand("hmda-fixture", "Write the synthetic HMDA-like raw extract");
  hf->add_option("--out", out, "Output CSV path")->required();
  hf->add_option("--seed", seed, "Fixture seed");
  hf->add_option("--filtered-rows", filtered, "Rows the rules drop");

  auto* rep = app.add_subcommand("report", "Render a study summary as a table");
  rep->add_option("--in", in, "summary.json")->required();
  rep->add_option("--format", format, "md | csv")->check(CLI::IsMember({"md", "csv"}));
  rep->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("UsageError", ErrorClass::Config, e.what());
  }

  try {
    if (sim->parsed()) return cmd_simulate(config, world, out);
    if (pre->parsed()) return cmd_preprocess(config, out);
    if (trn->parsed()) return cmd_train(config, out);
    if (trd->parsed()) return cmd_tradeoff(config, out);
    if (std_->parsed()) return cmd_study(config, jobs, out, persist, quiet);
    if (hp->parsed()) return cmd_hmda_prepare(config, out);
    if (hf->parsed()) return cmd_hmda_fixture(out, seed, filtered);
    if (rep->parsed()) return cmd_report(in, format, out);
  } catch (const Error& e) {
    return report_error(e.kind(), e.error_class(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error("IoError", ErrorClass::Config, e.what());
  } catch (const std::exception& e) {
    return report_error("InternalError", ErrorClass::Numeric, e.what());
  }
  return 0;
}
