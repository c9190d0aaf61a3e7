#pragma once

#include <stdexcept>
#include <string>

namespace ciid {

// Invalid parameters or inputs; the CLI maps this to exit code 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An input violates a documented precondition of the operation.
struct PreconditionError : ValidationError {
  using ValidationError::ValidationError;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Requested feature not available for this law/spec.
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical procedure failed (bracketing, truncation, non-monotone conditional).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be read or written; exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace ciid
