#pragma once

// Helpers for the line-oriented model checkpoint formats.

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "tweetgauge/error.hpp"
#include "tweetgauge/text_io.hpp"

namespace tweetgauge::serial {

inline std::string next_line(std::istream& in, std::string_view context) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(context) + ": unexpected end of checkpoint");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

/// Reads `<key> <value>` and returns the value text.
inline std::string read_field(std::istream& in, std::string_view key) {
  const std::string line = next_line(in, key);
  const auto space = line.find(' ');
  if (space == std::string::npos || std::string_view(line).substr(0, space) != key) {
    throw DataError("checkpoint: expected `" + std::string(key) + " <value>`, found `" + line + "`");
  }
  return line.substr(space + 1);
}

inline std::uint64_t read_uint(std::istream& in, std::string_view key) {
  const std::string text = read_field(in, key);
  std::uint64_t value = 0;
  if (!parse_uint(text, value)) throw DataError("checkpoint: `" + std::string(key) + "` is not an integer");
  return value;
}

inline double read_double(std::istream& in, std::string_view key) {
  const std::string text = read_field(in, key);
  double value = 0;
  if (!parse_double(text, value)) throw DataError("checkpoint: `" + std::string(key) + "` is not a number");
  return value;
}

inline void expect_line(std::istream& in, std::string_view expected) {
  const std::string line = next_line(in, expected);
  if (line != expected) {
    throw DataError("checkpoint: expected `" + std::string(expected) + "`, found `" + line + "`");
  }
}

/// One value per line, in storage order.
inline void write_values(std::ostream& out, const Eigen::Ref<const Eigen::VectorXd>& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) out << format_double(values[i]) << '\n';
}

inline Eigen::VectorXd read_values(std::istream& in, Eigen::Index count, std::string_view context) {
  Eigen::VectorXd values(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const std::string line = next_line(in, context);
    if (!parse_double(line, values[i])) {
      throw DataError("checkpoint: " + std::string(context) + " value " + std::to_string(i) +
                      " is not a number");
    }
  }
  return values;
}

}  // namespace tweetgauge::serial
