#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gridt {

/// A header plus string cells. Cells never contain separators or quotes in
/// the tables this project writes; the reader still honours RFC 4180 quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::out_of_range.
  std::size_t column(std::string_view name) const;
};

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace gridt
