#pragma once

#include <stdexcept>
#include <string>

namespace parsemunge {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: unknown categories, dangling registry references,
// malformed config documents. The CLI maps these to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad data: ragged CSV rows, missing source headers, cardinality violations,
// artifacts that cannot be read. The CLI maps these to exit status 3.
class DataError : public Error {
 public:
  using Error::Error;
};

class VersionError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace parsemunge
