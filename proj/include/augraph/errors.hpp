#pragma once

#include <stdexcept>
#include <string>

namespace augraph {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or misuse of an interface contract.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Shape or dimension mismatch between operands.
class ShapeError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// Problems with on-disk artifacts: bad magic, wrong version, truncation,
/// checksum mismatch, missing sections.
class DataError : public Error {
public:
  enum class Kind { format, version, truncated, checksum, missing };

  DataError(Kind k, const std::string& msg) : Error(msg), kind(k) {}

  Kind kind;
};

/// Numerical failure: NaN gradients, non-finite inputs, nondeterminism.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace augraph
