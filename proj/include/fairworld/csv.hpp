#pragma once

#include <istream>
#include <string>
#include <vector>

namespace fairworld::csv {

// Splits one CSV record. Handles double-quoted fields with "" escapes; does not
// support embedded newlines.
std::vector<std::string> split_record(const std::string& line);

// Reads the next non-empty line (CR stripped). Returns false at EOF.
bool next_line(std::istream& in, std::string& line);

// Formats a double so that parsing it back gives the identical value.
std::string format_double(double v);

}  // namespace fairworld::csv
