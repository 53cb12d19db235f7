#include "fairworld/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fairworld/csv.hpp"
#include "fairworld/error.hpp"
#include "fairworld/random.hpp"

namespace fairworld {

namespace csv {

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace csv

std::string to_string(ColumnKind kind) {
  return kind == ColumnKind::Binary ? "binary" : "numeric";
}

ColumnKind column_kind_from_string(std::string_view s) {
  if (s == "binary") return ColumnKind::Binary;
  if (s == "numeric") return ColumnKind::Numeric;
  throw SchemaMismatch("unknown column kind '" + std::string(s) + "'");
}

Dataset::Dataset(std::vector<Column> columns, std::string pa_column, std::string target_column)
    : columns_(std::move(columns)), pa_(std::move(pa_column)), target_(std::move(target_column)) {
  if (columns_.empty()) throw SchemaMismatch("dataset has no columns");
  n_rows_ = columns_.front().values.size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto& c = columns_[j];
    if (c.values.size() != n_rows_) {
      throw SchemaMismatch("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                           " rows, expected " + std::to_string(n_rows_));
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (columns_[k].name == c.name) throw SchemaMismatch("duplicate column '" + c.name + "'");
    }
    for (std::size_t i = 0; i < n_rows_; ++i) {
      const double v = c.values[i];
      if (!std::isfinite(v)) {
        throw SchemaMismatch("column '" + c.name + "' row " + std::to_string(i) + " is missing or non-finite");
      }
      if (c.kind == ColumnKind::Binary && v != 0.0 && v != 1.0) {
        throw SchemaMismatch("binary column '" + c.name + "' row " + std::to_string(i) + " holds " +
                             csv::format_double(v));
      }
    }
  }
  for (const auto* designated : {&pa_, &target_}) {
    if (column(*designated).kind != ColumnKind::Binary) {
      throw SchemaMismatch("designated column '" + *designated + "' must be binary");
    }
  }
  if (pa_ == target_) throw SchemaMismatch("protected attribute and target must differ");
}

bool Dataset::has_column(std::string_view name) const noexcept {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

std::size_t Dataset::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return j;
  }
  throw SchemaMismatch("no column named '" + std::string(name) + "'");
}

const Column& Dataset::column(std::string_view name) const { return columns_[index_of(name)]; }

std::vector<int> Dataset::groups() const {
  const auto& v = column(pa_).values;
  std::vector<int> g(v.size());
  std::transform(v.begin(), v.end(), g.begin(), [](double x) { return static_cast<int>(x); });
  return g;
}

std::vector<int> Dataset::labels() const {
  const auto& v = column(target_).values;
  std::vector<int> y(v.size());
  std::transform(v.begin(), v.end(), y.begin(), [](double x) { return static_cast<int>(x); });
  return y;
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) {
    if (c.name != target_) names.push_back(c.name);
  }
  return names;
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column out{c.name, c.kind, {}};
    out.values.reserve(rows.size());
    for (auto r : rows) out.values.push_back(c.values.at(r));
    cols.push_back(std::move(out));
  }
  return Dataset(std::move(cols), pa_, target_);
}

Dataset Dataset::with_values(std::string_view name, std::vector<double> values) const {
  auto cols = columns_;
  cols[index_of(name)].values = std::move(values);
  return Dataset(std::move(cols), pa_, target_);
}

bool Dataset::same_schema(const Dataset& other) const noexcept {
  if (pa_ != other.pa_ || target_ != other.target_ || columns_.size() != other.columns_.size()) return false;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name != other.columns_[j].name || columns_[j].kind != other.columns_[j].kind) return false;
  }
  return true;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n_rows,
                                                                            const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("split.train_fraction must lie in (0, 1)");
  }
  if (n_rows < 10) throw TooFewRows("split needs at least 10 rows, got " + std::to_string(n_rows));
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "split"));
  rng.shuffle(perm.begin(), perm.end());
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n_rows)));
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  auto [train, test] = split_indices(ds.n_rows(), spec);
  return {ds.take_rows(train), ds.take_rows(test)};
}

nlohmann::json schema_to_json(const Dataset& ds) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : ds.columns()) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  return {{"columns", cols}, {"pa_column", ds.pa_column()}, {"target_column", ds.target_column()}};
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".schema.json");
  return p;
}

void save_csv(const Dataset& ds, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream out(csv_path);
  if (!out) throw ParseError("cannot open '" + csv_path.string() + "' for writing");
  const auto& cols = ds.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j].name;
  out << '\n';
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      const double v = cols[j].values[i];
      if (cols[j].kind == ColumnKind::Binary) {
        out << (v != 0.0 ? '1' : '0');
      } else {
        out << csv::format_double(v);
      }
    }
    out << '\n';
  }
  std::ofstream side(sidecar_path(csv_path));
  side << schema_to_json(ds).dump(2) << '\n';
}

Dataset parse_csv(std::istream& in, const nlohmann::json& schema, const std::string& origin) {
  std::vector<Column> cols;
  std::string pa, target;
  try {
    for (const auto& c : schema.at("columns")) {
      cols.push_back({c.at("name").get<std::string>(), column_kind_from_string(c.at("kind").get<std::string>()), {}});
    }
    pa = schema.at("pa_column").get<std::string>();
    target = schema.at("target_column").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("malformed schema sidecar for " + origin + ": " + e.what());
  }

  std::string line;
  if (!csv::next_line(in, line)) throw ParseError(origin + ": empty file");
  const auto header = csv::split_record(line);
  if (header.size() != cols.size()) {
    throw SchemaMismatch(origin + ": header has " + std::to_string(header.size()) + " columns, schema has " +
                         std::to_string(cols.size()));
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (header[j] != cols[j].name) {
      throw SchemaMismatch(origin + ": header column " + std::to_string(j + 1) + " is '" + header[j] +
                           "', schema expects '" + cols[j].name + "'");
    }
  }

  std::size_t row = 0;
  while (csv::next_line(in, line)) {
    ++row;
    const auto fields = csv::split_record(line);
    if (fields.size() != cols.size()) {
      throw ParseError(origin + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(cols.size()));
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto& f = fields[j];
      double v = 0.0;
      const char* first = f.data();
      const char* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (f.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError(origin + ": row " + std::to_string(row) + ", column '" + cols[j].name +
                         "': cannot parse '" + f + "' as a number");
      }
      if (cols[j].kind == ColumnKind::Binary && v != 0.0 && v != 1.0) {
        throw ParseError(origin + ": row " + std::to_string(row) + ", column '" + cols[j].name +
                         "': binary value must be 0 or 1, got '" + f + "'");
      }
      cols[j].values.push_back(v);
    }
  }
  return Dataset(std::move(cols), pa, target);
}

Dataset load_csv(const std::filesystem::path& csv_path, const nlohmann::json& schema) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open '" + csv_path.string() + "'");
  return parse_csv(in, schema, csv_path.string());
}

Dataset load_csv(const std::filesystem::path& csv_path) {
  const auto side = sidecar_path(csv_path);
  std::ifstream in(side);
  if (!in) throw SchemaMismatch("missing schema sidecar '" + side.string() + "'");
  nlohmann::json schema;
  try {
    in >> schema;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("cannot parse sidecar '" + side.string() + "': " + e.what());
  }
  return load_csv(csv_path, schema);
}

}  // namespace fairworld
