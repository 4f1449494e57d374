#pragma once

#include <stdexcept>
#include <string>

namespace infoop {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (parameter dimension, row counts, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A noise or joint covariance is not symmetric positive definite.
class CovarianceError : public Error {
 public:
  using Error::Error;
};

/// A metric (mass matrix, prior precision) is not symmetric positive definite.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// A finite-element or modal system could not be solved.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Undamped forcing exactly at a natural frequency.
class ResonanceError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace infoop
