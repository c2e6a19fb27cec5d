#pragma once

#include <stdexcept>
#include <string>

namespace wfspec {

/// Thrown when an argument lies outside the mathematical domain of an operation
/// (K < 2, negative degree, non-positive Jacobi parameter, ...).
class ParameterDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown for invalid model or job configuration (asymmetric sigma, missing keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation requested at a boundary point where the quantity is singular.
class BoundarySingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace wfspec
