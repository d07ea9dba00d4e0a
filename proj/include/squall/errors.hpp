#pragma once

#include <stdexcept>
#include <string>

namespace squall {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed arguments, config files, or CLI input.
struct ConfigError : Error {
  using Error::Error;
};

// Evaluation requested outside the admissible domain (e.g. nonpositive
// state fed to a power nonlinearity).
struct DomainError : Error {
  using Error::Error;
};

// Weighted integral with exponent <= -1: the integral does not exist.
struct NonIntegrableExponent : Error {
  using Error::Error;
};

// A structural hypothesis on exponents is violated (load exponent outside
// (-1, p-1), singular exponent outside (0, 1), ...).
struct HypothesisViolation : Error {
  using Error::Error;
};

// Comparison-field construction could not certify a positive lower slope.
struct BarrierFailure : Error {
  using Error::Error;
};

// A sampled nonlinearity value escaped its declared envelope.
struct EnvelopeViolation : Error {
  using Error::Error;
};

// Exponent admissibility check failed where a passing check is required.
struct AdmissibilityError : Error {
  using Error::Error;
};

// No box scale closes the invariance inequalities within the search range.
struct ClosureFailure : Error {
  using Error::Error;
};

// Gradient-bound calibration had no usable sample problems.
struct CalibrationError : Error {
  using Error::Error;
};

}  // namespace squall
