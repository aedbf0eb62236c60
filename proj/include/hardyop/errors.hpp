#pragma once

#include <stdexcept>
#include <string>

namespace hardyop {

/// Argument outside the domain of an operation (Im z <= 0, evaluation at an atom or pole).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative numerical procedure (quadrature, limit, root search) failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The input violates a documented precondition (beta != 1, measure not singular, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The function's real-branch structure is missing or cannot be handled.
class UnsupportedStructure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed analysis configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hardyop
