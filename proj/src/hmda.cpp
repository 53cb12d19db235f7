#include "fairworld/hmda.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairworld/csv.hpp"
#include "fairworld/error.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto bar = key.find('|', start);
    parts.push_back(key.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return parts;
}

bool key_matches(const std::vector<std::string>& pattern, const std::vector<std::string>& values) {
  if (pattern.size() != values.size()) return false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (pattern[k] != "*" && pattern[k] != values[k]) return false;
  }
  return true;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? "|" : "") + parts[k];
  return out;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::size_t RawTable::index_of(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaMismatch("raw table has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

RawTable read_raw_csv(std::istream& in, const std::string& origin) {
  RawTable t;
  std::string line;
  if (!csv::next_line(in, line)) throw ParseError(origin + ": empty file");
  t.header = csv::split_record(line);
  for (auto& h : t.header) h = trim(h);
  std::size_t row = 1;
  while (csv::next_line(in, line)) {
    ++row;
    auto rec = csv::split_record(line);
    if (rec.size() != t.header.size()) {
      throw ParseError(origin + ": row " + std::to_string(row) + " has " + std::to_string(rec.size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    }
    for (auto& v : rec) v = trim(v);
    t.rows.push_back(std::move(rec));
  }
  return t;
}

RawTable read_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open raw data file '" + path.string() + "'");
  return read_raw_csv(in, path.string());
}

HmdaEncodingRules hmda_rules_from_json(const nlohmann::json& j) {
  HmdaEncodingRules r;
  try {
    r.protected_column = j.at("protected").get<std::string>();
    r.target_column = j.at("target").get<std::string>();
    if (j.contains("missing")) r.missing = j.at("missing").get<std::vector<std::string>>();
    for (std::size_t c = 0; c < j.at("columns").size(); ++c) {
      const auto& jc = j.at("columns").at(c);
      const std::string where = "rules.columns[" + std::to_string(c) + "]";
      RecodeRule rule;
      rule.name = jc.at("name").get<std::string>();
      try {
        rule.kind = column_kind_from_string(jc.at("kind").get<std::string>());
      } catch (const SchemaMismatch& e) {
        throw ConfigError(where + ".kind: " + e.what());
      }
      if (jc.contains("sources")) {
        rule.sources = jc.at("sources").get<std::vector<std::string>>();
      } else {
        rule.sources = {jc.at("source").get<std::string>()};
      }
      if (rule.sources.empty()) throw ConfigError(where + ".sources: must not be empty");
      if (jc.contains("map")) {
        for (const auto& [k, v] : jc.at("map").items()) {
          if (v.is_string() && v.get<std::string>() == "drop") {
            rule.map[k] = std::nullopt;
          } else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) {
            rule.map[k] = v.get<int>();
          } else {
            throw ConfigError(where + ".map[\"" + k + "\"]: must be 0, 1 or \"drop\"");
          }
          if (split_key(k).size() != rule.sources.size()) {
            throw ConfigError(where + ".map[\"" + k + "\"]: key needs one '|'-separated part per source");
          }
        }
      }
      if (jc.contains("otherwise")) {
        const auto o = jc.at("otherwise").get<std::string>();
        if (o == "drop") {
          rule.otherwise = RecodeRule::Otherwise::Drop;
        } else if (o == "error") {
          rule.otherwise = RecodeRule::Otherwise::Error;
        } else {
          throw ConfigError(where + ".otherwise: must be \"drop\" or \"error\"");
        }
      }
      if (jc.contains("transform")) {
        const auto t = jc.at("transform").get<std::string>();
        if (t != "log" && t != "none") throw ConfigError(where + ".transform: must be \"log\" or \"none\"");
        rule.log = t == "log";
      }
      if (jc.contains("missing")) rule.missing = jc.at("missing").get<std::vector<std::string>>();
      if (rule.kind == ColumnKind::Binary && rule.map.empty()) throw ConfigError(where + ".map: binary columns need a map");
      if (rule.kind == ColumnKind::Numeric && rule.sources.size() != 1) {
        throw ConfigError(where + ".sources: numeric columns take exactly one source");
      }
      r.columns.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rules: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rules: ") + e.what());
  }
  return r;
}

HmdaEncodingRules load_hmda_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rules file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return hmda_rules_from_json(j);
}

EncodeResult hmda_encode(const RawTable& raw, const HmdaEncodingRules& rules) {
  struct Compiled {
    const RecodeRule* rule;
    std::vector<std::size_t> source_idx;
    std::vector<std::pair<std::vector<std::string>, std::optional<int>>> patterns;  // wildcard keys
  };
  std::vector<Compiled> compiled;
  for (const auto& rule : rules.columns) {
    Compiled c{&rule, {}, {}};
    for (const auto& s : rule.sources) c.source_idx.push_back(raw.index_of(s));
    for (const auto& [k, v] : rule.map) {
      if (k.find('*') != std::string::npos) c.patterns.emplace_back(split_key(k), v);
    }
    compiled.push_back(std::move(c));
  }

  EncodeResult result;
  result.rows_in = raw.rows.size();
  std::vector<std::vector<double>> values(compiled.size());
  std::vector<std::string> parts;
  std::vector<double> row_values(compiled.size());
  for (const auto& row : raw.rows) {
    std::string drop_reason;
    for (std::size_t c = 0; c < compiled.size() && drop_reason.empty(); ++c) {
      const auto& rule = *compiled[c].rule;
      parts.clear();
      for (auto idx : compiled[c].source_idx) parts.push_back(row[idx]);
      const bool missing = std::any_of(parts.begin(), parts.end(), [&](const std::string& v) {
        return std::find(rule.missing.begin(), rule.missing.end(), v) != rule.missing.end() ||
               std::find(rules.missing.begin(), rules.missing.end(), v) != rules.missing.end();
      });
      if (missing) {
        drop_reason = "missing:" + rule.name;
        break;
      }
      if (rule.kind == ColumnKind::Numeric) {
        double v = 0.0;
        const auto& s = parts.front();
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v) || (rule.log && v <= 0.0)) {
          drop_reason = "invalid:" + rule.name;
          break;
        }
        row_values[c] = rule.log ? std::log(v) : v;
        continue;
      }
      const auto key = join(parts);
      std::optional<std::optional<int>> hit;
      if (const auto it = rule.map.find(key); it != rule.map.end()) {
        hit = it->second;
      } else {
        for (const auto& [pattern, v] : compiled[c].patterns) {
          if (key_matches(pattern, parts)) {
            hit = v;
            break;
          }
        }
      }
      if (!hit) {
        if (rule.otherwise == RecodeRule::Otherwise::Error) {
          throw UnmappedCategory("column '" + rule.name + "' (source " + join(rule.sources) + ") has unmapped value '" +
                                 key + "'");
        }
        drop_reason = "filtered:" + rule.name;
        break;
      }
      if (!*hit) {
        drop_reason = "filtered:" + rule.name;
        break;
      }
      row_values[c] = static_cast<double>(**hit);
    }
    if (!drop_reason.empty()) {
      ++result.dropped[drop_reason];
      continue;
    }
    for (std::size_t c = 0; c < compiled.size(); ++c) values[c].push_back(row_values[c]);
  }

  std::vector<Column> cols;
  for (std::size_t c = 0; c < compiled.size(); ++c) {
    cols.push_back({compiled[c].rule->name, compiled[c].rule->kind, std::move(values[c])});
  }
  result.data = Dataset(std::move(cols), rules.protected_column, rules.target_column);
  return result;
}

nlohmann::json to_json(const EncodeResult& r) {
  std::size_t dropped = 0;
  for (const auto& [k, v] : r.dropped) dropped += v;
  return {{"rows_in", r.rows_in}, {"rows_out", r.data.n_rows()}, {"rows_dropped", dropped}, {"dropped", r.dropped}};
}

RawTable hmda_fixture(const HmdaFixtureSpec& spec) {
  RawTable t;
  t.header = {"activity_year",        "state_code",  "action_taken",          "derived_race",
              "derived_ethnicity",    "derived_sex", "loan_purpose",          "loan_amount",
              "debt_to_income_ratio", "applicant_age_above_62"};
  Rng rng(derive_seed(spec.seed, "hmda-fixture"));
  auto pick = [&](std::initializer_list<const char*> options) {
    const auto k = rng.below(options.size());
    return std::string(*(options.begin() + static_cast<std::ptrdiff_t>(k)));
  };
  auto bern = [&](double p) { return rng.uniform() < p; };
  auto logistic = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  struct Person {
    int group;
    bool age62, female, purchase, high_dti;
    double log_amount;
    double latent;
  };
  auto draw = [&](int group) {
    Person p{};
    p.group = group;
    p.age62 = bern(group ? 0.14 : 0.22);
    p.female = bern(group ? 0.48 : 0.33);
    p.purchase = bern(logistic((group ? -0.50 : -0.30) - 0.8 * p.age62 + 0.1 * p.female));
    p.high_dti = bern(logistic((group ? 0.95 : 0.60) - 0.3 * p.age62));
    const double u1 = rng.uniform(), u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    p.log_amount = 12.1 - 0.35 * group + 0.45 * p.purchase - 0.25 * p.age62 - 0.1 * p.female + 0.65 * z;
    const double v = rng.uniform();
    p.latent = 0.8 * (p.log_amount - 12.1) - 1.3 * p.high_dti + 0.4 * p.purchase - 0.3 * p.age62 +
               0.1 * p.female + std::log(v / (1.0 - v));
    return p;
  };
  auto amount_text = [](double log_amount) {
    const double a = std::max(5000.0, std::round(std::exp(log_amount) / 10000.0) * 10000.0 + 5000.0);
    return std::to_string(static_cast<long long>(a));
  };
  auto row_of = [&](const Person& p, bool approved) {
    std::vector<std::string> r(t.header.size());
    r[0] = "2022";
    r[1] = "WI";
    r[2] = approved ? pick({"1", "1", "1", "1", "1", "1", "1", "1", "2", "8"}) : pick({"3", "3", "3", "3", "7"});
    if (p.group) {
      r[3] = "Black or African American";
      r[4] = pick({"Not Hispanic or Latino", "Not Hispanic or Latino", "Not Hispanic or Latino",
                   "Not Hispanic or Latino", "Hispanic or Latino", "Ethnicity Not Available"});
    } else {
      r[3] = "White";
      r[4] = "Not Hispanic or Latino";
    }
    r[5] = p.female ? "Female" : pick({"Male", "Male", "Joint"});
    r[6] = p.purchase ? "1" : pick({"2", "31", "32", "4"});
    r[7] = amount_text(p.log_amount);
    r[8] = p.high_dti ? pick({"44", "45", "46", "47", "48", "49", "50%-60%", ">60%"})
                      : pick({"<20%", "20%-<30%", "30%-<36%", "36", "37", "38", "39", "40", "41", "42", "43"});
    r[9] = p.age62 ? "Yes" : "No";
    return r;
  };

  // Retained rows: approvals are the top-k latent scores within each group,
  // i.e. a logistic model with a group-specific intercept hitting k exactly.
  const std::size_t n_group[2] = {spec.reference_rows, spec.protected_rows};
  const double rate[2] = {spec.reference_approval, spec.protected_approval};
  for (int g = 0; g < 2; ++g) {
    std::vector<Person> people;
    for (std::size_t i = 0; i < n_group[g]; ++i) people.push_back(draw(g));
    std::vector<std::size_t> order(people.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return people[a].latent > people[b].latent; });
    const auto k = static_cast<std::size_t>(std::llround(rate[g] * static_cast<double>(people.size())));
    std::vector<bool> approved(people.size(), false);
    for (std::size_t r = 0; r < k; ++r) approved[order[r]] = true;
    for (std::size_t i = 0; i < people.size(); ++i) t.rows.push_back(row_of(people[i], approved[i]));
  }

  // Filler rows that the bundled rules drop, one defect each.
  for (std::size_t i = 0; i < spec.filtered_rows; ++i) {
    const auto p = draw(bern(0.1) ? 1 : 0);
    auto r = row_of(p, bern(0.65));
    switch (rng.below(8)) {
      case 0: r[3] = pick({"Asian", "American Indian or Alaska Native", "2 or more minority races", "Joint"}); break;
      case 1: r[3] = "Race Not Available"; r[4] = pick({"Ethnicity Not Available", "Not Hispanic or Latino"}); break;
      case 2: r[3] = "White"; r[4] = "Hispanic or Latino"; break;
      case 3: r[2] = pick({"4", "5", "6"}); break;
      case 4: r[8] = pick({"NA", "Exempt"}); break;
      case 5: r[5] = "Sex Not Available"; break;
      case 6: r[9] = "NA"; break;
      default: r[6] = "5"; break;
    }
    t.rows.push_back(std::move(r));
  }
  rng.shuffle(t.rows.begin(), t.rows.end());
  return t;
}

void write_raw_csv(const RawTable& raw, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  for (std::size_t k = 0; k < raw.header.size(); ++k) out << (k ? "," : "") << quote_if_needed(raw.header[k]);
  out << '\n';
  for (const auto& row : raw.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << quote_if_needed(row[k]);
    out << '\n';
  }
}

}  // namespace fairworld
