#pragma once

#include <stdexcept>
#include <string>

namespace lsirm {

/// Malformed or inconsistent user input (bad shapes, invalid values).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Degenerate numerical state, e.g. a non-finite log-likelihood.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The chain could not be started from a finite posterior.
class InitializationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// An operation was called in a configuration where it is not defined.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lsirm
