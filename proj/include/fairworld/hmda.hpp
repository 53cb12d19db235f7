#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairworld/dataset.hpp"

namespace fairworld {

// Raw loan-level rows as strings, addressed by header name.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t index_of(const std::string& name) const;  // throws SchemaMismatch
};

RawTable read_raw_csv(std::istream& in, const std::string& origin = "<stream>");
RawTable read_raw_csv(const std::filesystem::path& path);

// One output column. Binary columns recode a category (or a '|'-joined tuple
// of categories when several sources are given; '*' matches anything) to 0/1
// or to "drop". Numeric columns parse the source and optionally log it.
struct RecodeRule {
  std::string name;
  ColumnKind kind = ColumnKind::Binary;
  std::vector<std::string> sources;
  std::map<std::string, std::optional<int>> map;  // nullopt: drop the row
  enum class Otherwise { Error, Drop } otherwise = Otherwise::Error;
  bool log = false;
  std::vector<std::string> missing;  // codes treated as missing for this column
};

struct HmdaEncodingRules {
  std::string protected_column;
  std::string target_column;
  std::vector<RecodeRule> columns;
  std::vector<std::string> missing;  // codes treated as missing in every column
};

HmdaEncodingRules hmda_rules_from_json(const nlohmann::json& j);
HmdaEncodingRules load_hmda_rules(const std::filesystem::path& path);

struct EncodeResult {
  Dataset data;
  std::size_t rows_in = 0;
  std::map<std::string, std::size_t> dropped;  // "<reason>:<column>" -> rows
};

// Pure function of rows and rules. A row is dropped at its first failing
// column (rules order): a missing code ("missing:"), a category mapped to
// drop or unmatched under otherwise=drop ("filtered:"), or an unparseable /
// non-positive numeric ("invalid:"). Unmatched categories under
// otherwise=error throw UnmappedCategory naming the column and value.
EncodeResult hmda_encode(const RawTable& raw, const HmdaEncodingRules& rules);

nlohmann::json to_json(const EncodeResult& r);

// Synthetic loan-level extract in the raw LAR layout (action_taken,
// derived_race, derived_ethnicity, loan_amount, loan_purpose,
// debt_to_income_ratio, applicant_age_above_62, derived_sex), used when the
// real extract is unavailable. Under the bundled rules it encodes to
// `reference_rows` + `protected_rows` rows with the given group approval rates
// (exact up to rounding), plus filler rows that the rules drop.
struct HmdaFixtureSpec {
  std::size_t reference_rows = 79450;  // non-Hispanic White
  std::size_t protected_rows = 4358;   // Black
  double reference_approval = 0.679;
  double protected_approval = 0.486;
  std::size_t filtered_rows = 12000;
  std::uint64_t seed = 2022;
};

RawTable hmda_fixture(const HmdaFixtureSpec& spec);
void write_raw_csv(const RawTable& raw, const std::filesystem::path& path);

}  // namespace fairworld
