#pragma once

#include <stdexcept>
#include <string>

namespace tweetgauge {

/// Invalid configuration or flag combination (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A lookup for a key that is absent from a loaded store.
class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

/// Training produced a non-finite loss (CLI exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tweetgauge
