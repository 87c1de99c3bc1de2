#include "tweetgauge/text_io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <iterator>

#include "tweetgauge/error.hpp"

namespace tweetgauge {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return npos;
}

namespace {

std::string row_error(std::string_view source, std::size_t row, std::size_t line,
                      std::string_view what) {
  std::string msg(source);
  msg += ": malformed CSV at row " + std::to_string(row) + " (line " + std::to_string(line) +
         "): ";
  msg += what;
  return msg;
}

}  // namespace

CsvTable read_csv(std::istream& in, std::string_view source) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t pos = 0;
  if (data.size() >= 3 && data.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  CsvTable table;
  std::size_t line = 1;
  std::size_t record_index = 0;  // 0 = header

  while (pos < data.size()) {
    const std::size_t record_line = line;
    std::vector<std::string> fields;
    std::string field;
    bool record_done = false;
    bool field_quoted = false;

    while (!record_done) {
      if (pos >= data.size()) {
        fields.push_back(std::move(field));
        break;
      }
      char ch = data[pos];
      if (ch == '"' && field.empty() && !field_quoted) {
        field_quoted = true;
        ++pos;
        for (;;) {
          if (pos >= data.size()) {
            throw DataError(row_error(source, record_index, record_line, "unterminated quoted field"));
          }
          ch = data[pos++];
          if (ch == '"') {
            if (pos < data.size() && data[pos] == '"') {
              field.push_back('"');
              ++pos;
            } else {
              break;
            }
          } else {
            if (ch == '\n') ++line;
            field.push_back(ch);
          }
        }
        if (pos < data.size() && data[pos] != ',' && data[pos] != '\n' && data[pos] != '\r') {
          throw DataError(
              row_error(source, record_index, record_line, "unexpected character after closing quote"));
        }
        continue;
      }
      if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        ++pos;
      } else if (ch == '\r' || ch == '\n') {
        fields.push_back(std::move(field));
        if (ch == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') ++pos;
        ++pos;
        ++line;
        record_done = true;
      } else {
        if (ch == '"') {
          throw DataError(row_error(source, record_index, record_line, "stray quote in unquoted field"));
        }
        field.push_back(ch);
        ++pos;
      }
    }

    // Blank physical lines between records are ignored.
    if (fields.size() == 1 && fields.front().empty() && !field_quoted) continue;

    if (record_index == 0) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size()) {
        throw DataError(row_error(source, record_index, record_line,
                                  "expected " + std::to_string(table.header.size()) + " fields, found " +
                                      std::to_string(fields.size())));
      }
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(record_line);
    }
    ++record_index;
  }
  if (record_index == 0) throw DataError(std::string(source) + ": missing CSV header row");
  return table;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string quoted = "\"";
  for (char ch : field) {
    if (ch == '"') quoted.push_back('"');
    quoted.push_back(ch);
  }
  quoted.push_back('"');
  return quoted;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  const auto result =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, decimals);
  std::string text(buf.data(), result.ptr);
  // "-0.000000" and "0.000000" must serialize identically.
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

namespace {

template <class T>
bool parse_number(std::string_view text, T& value) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  const auto result = std::from_chars(first, last, value);
  return result.ec == std::errc{} && result.ptr == last;
}

}  // namespace

bool parse_double(std::string_view text, double& value) { return parse_number(text, value); }
bool parse_float(std::string_view text, float& value) { return parse_number(text, value); }
bool parse_uint(std::string_view text, std::uint64_t& value) {
  if (!text.empty() && text.front() == '+') return false;
  return parse_number(text, value);
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char delimiter) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto next = text.find(delimiter, start);
    if (next == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, next - start));
    start = next + 1;
  }
}

}  // namespace tweetgauge
