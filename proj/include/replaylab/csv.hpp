#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace replaylab {

/// Locale-independent rendering with 12 significant digits ("nan" for NaN).
std::string format_number(double x);

/// Inverse of format_number. Throws std::invalid_argument on malformed input.
double parse_number(std::string_view text);

/// Numeric table with a named header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column position by name; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

void write_csv(std::ostream& os, const CsvTable& table);
CsvTable read_csv(std::istream& is);

}  // namespace replaylab
