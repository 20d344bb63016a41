#pragma once

#include <stdexcept>
#include <string>

namespace mfbm {

// Every failure the library reports derives from one of two std bases so
// callers can catch broadly (std::exception) or narrowly (the tags below).

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iteration did not converge or a factorization broke down.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A discretized kernel failed a structural check (e.g. not PSD).
class IntegrityError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Eigenmode too small to divide by.
class IllConditionedModeError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Quadrature or evaluation grid too coarse for the request.
class ResolutionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Evaluation point falls outside the sampled region.
class CoverageError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Inconsistent or missing configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mfbm
