#pragma once

#include <stdexcept>

namespace compois {

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure (maps to CLI exit code 4).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Fired when a rejection sampler exceeds its trial budget. Under correct
/// envelope bounds this never happens.
class RunawayRejection : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A linear predictor left the range where exp() is representable.
class DivergentLink : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularCovariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Bad input data or model description (maps to CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormulaError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace compois
