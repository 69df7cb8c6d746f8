#pragma once

#include <stdexcept>
#include <string>

namespace csa {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV cells, varlist syntax, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid command-line or configuration input.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be (positive) definite is numerically singular.
/// `index()` is the offending pivot/column, when known.
class SingularError : public Error {
 public:
  SingularError(const std::string& msg, int index = -1)
      : Error(msg), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// Estimation cannot proceed (all models skipped, order condition, ...).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace csa
