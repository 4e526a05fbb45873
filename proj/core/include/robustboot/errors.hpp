#pragma once

#include <stdexcept>
#include <string>

namespace robustboot {

/// Precondition or input-validation failure (bad weights, length mismatch,
/// malformed process parameters, out-of-space support points).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// A size guard was exceeded (support blowup, too many LP atoms,
/// too many outer replicates).
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to converge (simplex iteration cap,
/// root bracketing failure).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long iterations = -1)
      : std::runtime_error(what), iterations(iterations) {}
  long iterations;
};

/// The request is outside what this build supports (multi-dimensional
/// median, alpha coefficients for continuous-state chains).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robustboot
