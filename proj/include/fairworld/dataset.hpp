#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace fairworld {

enum class ColumnKind { Numeric, Binary };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view s);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> values;

  bool operator==(const Column&) const = default;
};

// Group coding used throughout: protected group a = 1, reference group a' = 0.
inline constexpr int kProtectedGroup = 1;
inline constexpr int kReferenceGroup = 0;

// Immutable column-major table with a designated binary protected attribute
// and binary target. Every constructor path validates the invariants.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Column> columns, std::string pa_column, std::string target_column);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return columns_.size(); }

  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::string_view name) const;
  const Column& column(std::size_t index) const { return columns_.at(index); }
  std::span<const double> values(std::string_view name) const { return column(name).values; }
  bool has_column(std::string_view name) const noexcept;
  std::size_t index_of(std::string_view name) const;

  const std::string& pa_column() const noexcept { return pa_; }
  const std::string& target_column() const noexcept { return target_; }

  // PA values as 0/1 integers.
  std::vector<int> groups() const;
  std::vector<int> labels() const;

  // Model inputs: every column except the target (the PA is included).
  std::vector<std::string> feature_names() const;

  Dataset take_rows(std::span<const std::size_t> rows) const;
  Dataset with_values(std::string_view name, std::vector<double> values) const;

  // Same names, kinds and designated columns.
  bool same_schema(const Dataset& other) const noexcept;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Column> columns_;
  std::string pa_;
  std::string target_;
  std::size_t n_rows_ = 0;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Returns the train row indices followed by the test row indices (sorted within each part).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n_rows,
                                                                            const SplitSpec& spec);
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

// Sidecar schema (column kinds + designated columns).
nlohmann::json schema_to_json(const Dataset& ds);

// CSV with a one-line header; the schema sidecar sits next to it.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);
void save_csv(const Dataset& ds, const std::filesystem::path& csv_path);
Dataset load_csv(const std::filesystem::path& csv_path, const nlohmann::json& schema);
Dataset load_csv(const std::filesystem::path& csv_path);  // reads sidecar_path(csv_path)

// Parses an already-read CSV body; used by load_csv and the tests.
Dataset parse_csv(std::istream& in, const nlohmann::json& schema, const std::string& origin = "<stream>");

}  // namespace fairworld
