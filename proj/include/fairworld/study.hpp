#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/adapt.hpp"
#include "fairworld/boost.hpp"
#include "fairworld/config.hpp"
#include "fairworld/dataset.hpp"
#include "fairworld/graph.hpp"
#include "fairworld/metrics.hpp"
#include "fairworld/scm.hpp"
#include "fairworld/tradeoff.hpp"
#include "fairworld/warp.hpp"

namespace fairworld {

enum class StudyKind { Simulation, Hmda };

struct TuningConfig {
  bool enabled = true;
  int budget = 20;
  int folds = 3;
  SearchSpace space;
};

struct StudyConfig {
  StudyKind kind = StudyKind::Simulation;
  std::filesystem::path scm_path;   // simulation; empty: built-in default
  std::filesystem::path data_path;  // hmda: encoded CSV with schema sidecar
  std::filesystem::path dag_path;   // hmda
  std::size_t n = 10000;
  int iterations = 25;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  BoostParams boost;
  TuningConfig tuning;
  LambdaSearchOptions lambda_search;
  CurveOptions curve;
  PanelOptions panel;
  int warp_source_group = kProtectedGroup;
  AdaptOptions adapt;
  std::filesystem::path output_dir = "out";
  bool persist_datasets = false;
};

// Config sections shared by the study and the single-step CLI commands. A
// missing section leaves `out` unchanged; unknown fields and out-of-range
// values throw ConfigError with the field path.
void read_boost_section(const ConfigFields& parent, const char* key, BoostParams& out);
void read_tuning_section(const ConfigFields& parent, const char* key, TuningConfig& out);
void read_lambda_section(const ConfigFields& parent, const char* key, LambdaSearchOptions& out);
void read_curve_section(const ConfigFields& parent, const char* key, CurveOptions& out);
void read_panel_section(const ConfigFields& parent, const char* key, PanelOptions& out);
void read_warp_section(const ConfigFields& parent, const char* key, int& source_group);
void read_adapt_section(const ConfigFields& parent, const char* key, AdaptOptions& out);

// Paths inside the document are resolved against `base_dir`. Errors are
// ConfigError with the offending field path, e.g. "study.boost.eta: ...".
StudyConfig study_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
StudyConfig load_study_config(const std::filesystem::path& path);
nlohmann::json to_json(const StudyConfig& cfg);

struct IterationResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error_kind;
  std::string error_message;

  int depth = 0;
  double eta = 0.0;
  double cv_auc = 0.0;
  std::vector<std::string> worlds;  // evaluation order
  std::map<std::string, FairnessReport> panels;
  std::map<std::string, double> base_rate_gap;  // train and test pooled
  LambdaStarResult lambda_star;
  std::vector<TradeoffCurve> curves;
  std::map<std::string, RelationResult> relations;
  std::map<std::string, std::size_t> adapt_fallbacks;
};

nlohmann::json to_json(const IterationResult& r);

// One pass of the pipeline on a fixed real-world split (plus the matching
// FiND split when available): fit warp and adapt on real train, build the
// pre-processed worlds, tune on real train at lambda = 0, train one
// unconstrained model per world on its own train part and evaluate it on its
// own test part, then search lambda* and trace the curves on every test world.
// Errors propagate.
IterationResult run_pipeline(const Dataset& real_train, const Dataset& real_test, const Dataset* find_train,
                             const Dataset* find_test, const AdjacencyInfo& adj, const StudyConfig& cfg,
                             std::uint64_t seed, const std::filesystem::path& dataset_dir = {});

struct StudyResult {
  StudyConfig config;
  std::vector<IterationResult> iterations;  // ordered by index
  nlohmann::json summary;
};

// Per iteration i: seed derive_seed(cfg.seed, "iteration", i), paired worlds,
// one shared split, run_pipeline. Failed iterations are recorded and skipped
// in the aggregate. `jobs` > 1 runs iterations concurrently; results are
// merged by index so the summary does not depend on `jobs`.
using ProgressFn = std::function<void(const IterationResult&)>;

StudyResult run_simulation_study(const StudyConfig& cfg, int jobs = 1, const ProgressFn& progress = {});

// Single split of the encoded data; no FiND world.
StudyResult run_hmda_study(const StudyConfig& cfg, const ProgressFn& progress = {});

StudyResult run_study(const StudyConfig& cfg, int jobs = 1, const ProgressFn& progress = {});

// Aggregates per-world metrics (mean, sd with n - 1, percentile interval
// containing the mean), relation tallies, lambda* outcomes and failures.
nlohmann::json summarize(const StudyConfig& cfg, const std::vector<IterationResult>& iterations);

// Writes summary.json, table.csv, curves.csv and iterations/iter_NNN.json.
void write_study_outputs(const StudyResult& result);

// Table-style rendering of a summary document.
std::string render_report(const nlohmann::json& summary, const std::string& format);

}  // namespace fairworld
