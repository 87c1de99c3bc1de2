#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tweetgauge {

/// Rows of an RFC-4180 CSV file. `line_numbers[i]` is the physical line on
/// which data row i starts (header is line 1).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Index of a header column, or npos.
  std::size_t column(std::string_view name) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Parses quoted fields with embedded commas, doubled quotes, and newlines.
/// Accepts LF or CRLF line endings and a leading UTF-8 BOM. Throws DataError
/// naming `source` and the offending row on malformed input.
CsvTable read_csv(std::istream& in, std::string_view source);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);
/// Fixed-point text with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Strict full-string parses; return false on any trailing garbage.
bool parse_double(std::string_view text, double& value);
bool parse_float(std::string_view text, float& value);
bool parse_uint(std::string_view text, std::uint64_t& value);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);

}  // namespace tweetgauge
