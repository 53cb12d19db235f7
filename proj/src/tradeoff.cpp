#include "fairworld/tradeoff.hpp"

#include <cmath>
#include <sstream>

#include "fairworld/csv.hpp"
#include "fairworld/error.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

namespace {

double test_disparity(const Dataset& train_ds, const Dataset& test, BoostParams params, double lambda) {
  params.lambda_fair = lambda;
  const auto model = train(train_ds, params);
  return disparity(predict_proba(model, test), test.groups());
}

}  // namespace

LambdaStarResult search_lambda_star(const Dataset& train_ds, const Dataset& test, const BoostParams& params,
                                    const LambdaSearchOptions& opts) {
  if (!(opts.eps > 0.0)) throw ConfigError("eps must be > 0");
  if (opts.grid.empty()) throw ConfigError("lambda grid must not be empty");
  if (opts.refine_steps < 0) throw ConfigError("refine_steps must be >= 0");
  for (std::size_t k = 0; k < opts.grid.size(); ++k) {
    if (!(opts.grid[k] >= 0.0) || (k > 0 && !(opts.grid[k] > opts.grid[k - 1]))) {
      throw ConfigError("lambda grid must be non-negative and strictly ascending");
    }
  }

  LambdaStarResult r;
  auto evaluate = [&](double lambda) {
    const double c = test_disparity(train_ds, test, params, lambda);
    r.evaluated.push_back({lambda, c});
    return c;
  };

  std::size_t hit = opts.grid.size();
  for (std::size_t k = 0; k < opts.grid.size(); ++k) {
    if (evaluate(opts.grid[k]) < opts.eps) {
      hit = k;
      break;
    }
  }
  if (hit == opts.grid.size()) {
    const auto* best = &r.evaluated.front();
    for (const auto& e : r.evaluated) {
      if (e.disparity < best->disparity) best = &e;
    }
    r.lambda_star = best->lambda;
    r.achieved_disparity = best->disparity;
    r.satisfied = false;
    return r;
  }

  double hi = opts.grid[hit];
  double hi_c = r.evaluated.back().disparity;
  if (hit > 0) {
    double lo = opts.grid[hit - 1];
    for (int s = 0; s < opts.refine_steps; ++s) {
      const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
      const double c = evaluate(mid);
      if (c < opts.eps) {
        hi = mid;
        hi_c = c;
      } else {
        lo = mid;
      }
    }
  }
  r.lambda_star = hi;
  r.achieved_disparity = hi_c;
  r.satisfied = true;
  return r;
}

LambdaStarResult find_lambda_star(const Dataset& train_ds, const Dataset& test, const BoostParams& params,
                                  const LambdaSearchOptions& opts) {
  auto r = search_lambda_star(train_ds, test, params, opts);
  if (!r.satisfied) {
    std::ostringstream os;
    os << "no lambda in the grid reaches test disparity < " << opts.eps << "; best achieved "
       << r.achieved_disparity << " at lambda " << r.lambda_star;
    throw GridExhausted(os.str());
  }
  return r;
}

std::vector<TradeoffCurve> tradeoff_curve(const Dataset& train_ds, const std::vector<NamedDataset>& test_worlds,
                                          double lambda_star, const BoostParams& params,
                                          const CurveOptions& opts) {
  if (opts.steps < 1) throw ConfigError("interpolation steps S must be >= 1");
  if (!(lambda_star >= 0.0)) throw ConfigError("lambda_star must be >= 0");
  for (const auto& [name, ds] : test_worlds) {
    if (!ds.same_schema(train_ds)) throw SchemaMismatch("test world '" + name + "' does not share the train schema");
  }
  const auto n_points = static_cast<std::size_t>(opts.steps) + 2;
  std::vector<TradeoffCurve> curves(test_worlds.size());
  for (std::size_t k = 0; k < test_worlds.size(); ++k) {
    curves[k].world = test_worlds[k].first;
    curves[k].points.resize(n_points);
  }

  std::vector<std::string> failure(n_points);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t nn = 0; nn < static_cast<std::ptrdiff_t>(n_points); ++nn) {
    const auto n = static_cast<std::size_t>(nn);
    try {
      const double w = static_cast<double>(n) / static_cast<double>(opts.steps + 1);
      BoostParams p = params;
      p.lambda_fair = w * lambda_star;
      const auto model = train(train_ds, p);
      for (std::size_t k = 0; k < test_worlds.size(); ++k) {
        const auto& test = test_worlds[k].second;
        const auto probs = predict_proba(model, test);
        const auto labels = test.labels();
        auto& pt = curves[k].points[n];
        pt.w = w;
        pt.lambda = p.lambda_fair;
        pt.fairness = 1.0 - disparity(probs, test.groups());
        pt.auc = auc(probs, labels);
        pt.auc_ci = auc_ci(probs, labels, opts.ci_level, opts.bootstrap_replicates,
                           derive_seed(opts.bootstrap_seed, "curve-point", n));
      }
    } catch (const std::exception& e) {
      failure[n] = e.what();
    }
  }
  for (const auto& msg : failure) {
    if (!msg.empty()) throw InvalidParamError("trade-off curve point failed: " + msg);
  }
  return curves;
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::Aligned: return "aligned";
    case Relation::Tradeoff: return "tradeoff";
    case Relation::Flat: return "flat";
  }
  return "flat";
}

Relation relation_from_string(const std::string& s) {
  if (s == "aligned") return Relation::Aligned;
  if (s == "tradeoff") return Relation::Tradeoff;
  if (s == "flat") return Relation::Flat;
  throw ConfigError("unknown relation '" + s + "'");
}

RelationResult relation_direction(const TradeoffCurve& curve) {
  if (curve.points.size() < 3) {
    throw TooFewPoints("relation needs at least 3 curve points, got " + std::to_string(curve.points.size()));
  }
  std::vector<double> f, a;
  for (const auto& p : curve.points) {
    f.push_back(p.fairness);
    a.push_back(p.auc);
  }
  RelationResult r;
  r.rho = spearman(f, a);
  if (std::isnan(r.rho)) return r;
  if (r.rho >= 0.5) {
    r.relation = Relation::Aligned;
  } else if (r.rho <= -0.5) {
    r.relation = Relation::Tradeoff;
  }
  return r;
}

std::string curves_csv_header() { return "world,w,lambda,fairness,auc,ci_lo,ci_hi"; }

std::string curve_csv_rows(const TradeoffCurve& curve, const std::string& prefix_columns) {
  std::ostringstream os;
  for (const auto& p : curve.points) {
    os << prefix_columns << curve.world << ',' << csv::format_double(p.w) << ',' << csv::format_double(p.lambda)
       << ',' << csv::format_double(p.fairness) << ',' << csv::format_double(p.auc) << ','
       << csv::format_double(p.auc_ci.lo) << ',' << csv::format_double(p.auc_ci.hi) << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const TradeoffCurve& curve) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"w", p.w},
                   {"lambda", p.lambda},
                   {"fairness", p.fairness},
                   {"auc", p.auc},
                   {"auc_ci", {p.auc_ci.lo, p.auc_ci.hi}}});
  }
  return {{"world", curve.world}, {"points", pts}};
}

nlohmann::json to_json(const LambdaStarResult& r) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : r.evaluated) ev.push_back({{"lambda", e.lambda}, {"disparity", e.disparity}});
  return {{"lambda_star", r.lambda_star},
          {"achieved_disparity", r.achieved_disparity},
          {"satisfied", r.satisfied},
          {"evaluated", ev}};
}

}  // namespace fairworld
