#pragma once

#include <stdexcept>
#include <string>

namespace specstop {

/// Base of every error raised by the library. Callers that only care about
/// "something went wrong in specstop" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operator is rank deficient at working precision.
class DegenerateOperator : public Error {
 public:
  using Error::Error;
};

/// A decomposition did not reach the requested accuracy.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// All estimated component variances vanish.
class DegenerateNoise : public Error {
 public:
  using Error::Error;
};

class UndefinedRelativeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace specstop
