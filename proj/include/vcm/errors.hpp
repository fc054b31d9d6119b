#pragma once

#include <stdexcept>
#include <string>

namespace vcm {

/// Invalid inputs or configuration. The CLI maps this family to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Matrix or vector dimensions do not agree.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A density measure is invalid (non-positive weight, bad bounds, bad table).
class MeasureError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A declared invariant of a constructed object does not hold.
class InvariantViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Failures during numerical iteration. The CLI maps this family to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method produced a non-finite value.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vcm
