#pragma once

#include <stdexcept>
#include <string>

namespace sae {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or model parameter is outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Inputs are structurally inconsistent (dimension mismatch, empty pool, infeasible design).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A factorization failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The regression design matrix is rank deficient.
class SingularDesign : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The requested estimator cannot be applied to the given sample.
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace sae
