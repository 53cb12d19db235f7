#include <doctest.h>

#include <cmath>
#include <fstream>

#include "../support/fixtures.hpp"
#include "fairworld/error.hpp"
#include "fairworld/study.hpp"

using namespace fairworld;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
  try {
    study_config_from_json(j, "/base");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

IterationResult fake(int index, double dp, double auc_value, Relation real_rel) {
  IterationResult r;
  r.index = index;
  r.ok = true;
  r.worlds = {"real", "warped"};
  for (const auto& w : r.worlds) {
    FairnessReport p;
    p.dp = w == "real" ? dp : 0.99;
    p.fpr_balance = 0.9;
    p.fnr_balance = 0.9;
    p.auc = auc_value;
    r.panels[w] = p;
    r.base_rate_gap[w] = w == "real" ? 0.2 : 0.01;
    r.relations[w] = {w == "real" ? real_rel : Relation::Aligned, 0.7};
  }
  r.lambda_star.lambda_star = 100.0;
  r.lambda_star.satisfied = true;
  return r;
}

StudyConfig tiny_config(const std::filesystem::path& out) {
  StudyConfig cfg;
  cfg.n = 600;
  cfg.iterations = 3;
  cfg.seed = 99;
  cfg.tuning.enabled = false;
  cfg.boost.rounds = 30;
  cfg.boost.depth = 2;
  cfg.lambda_search.grid = {0.0, 10.0, 100.0, 1000.0};
  cfg.curve.steps = 2;
  cfg.curve.bootstrap_replicates = 30;
  cfg.panel.replicates = 30;
  cfg.output_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("config defaults and path resolution") {
  const auto cfg = study_config_from_json(json{{"scm", "scm.json"}, {"output_dir", "o"}}, "/base/dir");
  CHECK(cfg.kind == StudyKind::Simulation);
  CHECK(cfg.scm_path == "/base/dir/scm.json");
  CHECK(cfg.output_dir == "/base/dir/o");
  CHECK(cfg.n == 10000);
  CHECK(cfg.iterations == 25);
  CHECK(cfg.lambda_search.eps == 0.01);
  CHECK(cfg.curve.steps == 9);
  CHECK(study_config_from_json(json{{"scm", "/abs/s.json"}}, "/base").scm_path == "/abs/s.json");
}

TEST_CASE("config errors name the field") {
  CHECK(config_error(json{{"iterations", 0}}).find("study.iterations") == 0);
  CHECK(config_error(json{{"iterations", "many"}}).find("study.iterations") == 0);
  CHECK(config_error(json{{"colour", 1}}).find("study.colour: unknown field") == 0);
  CHECK(config_error(json{{"boost", {{"eta", 2.0}}}}).find("study.boost.eta") == 0);
  CHECK(config_error(json{{"tuning", {{"depth", {5, 2}}}}}).find("study.tuning.depth") == 0);
  CHECK(config_error(json{{"lambda_search", {{"grid", {1.0, 1.0}}}}}).find("study.lambda_search.grid") == 0);
  CHECK(config_error(json{{"curve", {{"steps", 0}}}}).find("study.curve.steps") == 0);
  CHECK(config_error(json{{"panel", {{"threshold", 1.0}}}}).find("study.panel.threshold") == 0);
  CHECK(config_error(json{{"adapt", {{"bins", 1}}}}).find("study.adapt.bins") == 0);
  CHECK(config_error(json{{"warp", {{"source_group", 2}}}}).find("study.warp.source_group") == 0);
  CHECK(config_error(json{{"kind", "hmda"}}).find("study.data") == 0);
  CHECK(config_error(json{{"split", {{"train_fraction", 1.5}}}}).find("study.split.train_fraction") == 0);
  CHECK(config_error(json::array()).find("study: expected an object") == 0);
}

TEST_CASE("missing files are config errors") {
  auto cfg = tiny_config("/tmp/unused");
  cfg.scm_path = "/nonexistent/scm.json";
  CHECK_THROWS_AS(run_study(cfg), ConfigError);
  CHECK_THROWS_AS(load_study_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("summary statistics") {
  const std::vector<IterationResult> its{fake(0, 0.8, 0.88, Relation::Tradeoff), fake(1, 0.9, 0.86, Relation::Flat),
                                         fake(2, 0.7, 0.90, Relation::Tradeoff)};
  const auto s = summarize({}, its);
  const auto& dp = s["table"]["real"]["dp"];
  CHECK(dp["mean"].get<double>() == doctest::Approx(0.8));
  CHECK(dp["sd"].get<double>() == doctest::Approx(0.1));
  CHECK(dp["lo"].get<double>() <= dp["mean"].get<double>());
  CHECK(dp["hi"].get<double>() >= dp["mean"].get<double>());
  CHECK(dp["lo"].get<double>() == doctest::Approx(0.7 + 0.05 * 0.1));
  CHECK(s["table"]["real"]["ppv_parity"]["n"] == 0);
  CHECK(s["undefined_entries"]["real"]["ppv_parity"] == 3);
  CHECK(s["relations"]["real"]["tradeoff"] == 2);
  CHECK(s["relations"]["real"]["flat"] == 1);
  CHECK(s["relations"]["warped"]["aligned"] == 3);
  CHECK(s["pattern_iterations"] == 2);
  CHECK(s["base_rate_gap"]["real"]["mean"].get<double>() == doctest::Approx(0.2));

  const auto one = summarize({}, {its[0]});
  CHECK(one["table"]["real"]["dp"]["sd"] == 0.0);
  CHECK(one["table"]["real"]["dp"]["lo"] == one["table"]["real"]["dp"]["mean"]);

  auto failed = its;
  failed[1] = IterationResult{};
  failed[1].index = 1;
  failed[1].error_kind = "SingleClass";
  failed[1].error_message = "boom";
  const auto f = summarize({}, failed);
  CHECK(f["iterations_completed"] == 2);
  CHECK(f["failures"].size() == 1);
  CHECK(f["failures"][0]["iteration"] == 1);
  CHECK(f["table"]["real"]["dp"]["n"] == 2);
}

TEST_CASE("report rendering") {
  const auto s = summarize({}, {fake(0, 0.8, 0.88, Relation::Tradeoff), fake(1, 0.9, 0.86, Relation::Tradeoff)});
  const auto md = render_report(s, "md");
  CHECK(md.find("| Real | 0.850 (0.071) | 0.900 (0.000) | 0.900 (0.000) | NA (NA) | 0.870 (0.014) |") !=
        std::string::npos);
  CHECK(md.find("| Warped | 2 | 0 | 0 |") != std::string::npos);
  const auto csv = render_report(s, "csv");
  CHECK(csv.find("world,dp_mean,dp_sd") == 0);
  CHECK_THROWS_AS(render_report(s, "html"), ConfigError);
  CHECK_THROWS_AS(render_report(json{{"x", 1}}, "md"), SchemaMismatch);
}

TEST_CASE("small simulation study: outputs, audit trail and independence from --jobs") {
  fixtures::TempDir dir("study");
  auto cfg = tiny_config(dir / "a");
  const auto r1 = run_simulation_study(cfg, 1);
  REQUIRE(r1.iterations.size() == 3);
  for (const auto& it : r1.iterations) {
    INFO(it.error_message);
    CHECK(it.ok);
    CHECK(it.worlds == std::vector<std::string>{"real", "find", "adapted", "warped"});
    CHECK(it.curves.size() == 4);
    CHECK(it.curves[0].points.size() == 4);
  }
  write_study_outputs(r1);
  for (const char* f : {"summary.json", "table.csv", "curves.csv", "iterations/iter_000.json", "iterations/iter_002.json"}) {
    CHECK(std::filesystem::exists(dir / "a" / f));
  }
  CHECK(!std::filesystem::exists(dir / "a" / "datasets"));

  // Means in the summary are recomputable from the per-iteration files.
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    std::ifstream in(dir / "a" / "iterations" / ("iter_00" + std::to_string(i) + ".json"));
    sum += json::parse(in)["panels"]["warped"]["auc"].get<double>();
  }
  CHECK(r1.summary["table"]["warped"]["auc"]["mean"].get<double>() == doctest::Approx(sum / 3.0).epsilon(1e-12));

  cfg.output_dir = dir / "b";
  cfg.persist_datasets = true;
  const auto r3 = run_simulation_study(cfg, 3);
  CHECK(r3.summary.dump() == r1.summary.dump());
  CHECK(std::filesystem::exists(dir / "b" / "datasets" / "iter_001" / "warped_test.csv"));
}
