#pragma once

#include <stdexcept>
#include <string>

namespace eigencurve {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite parameter values or matrix entries.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed arguments: dimension mismatches, bad indices, unknown names.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (singular similarity, infeasible formula order, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or inconsistent session files.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A Touch row contradicts the crossing data. `row()` is 1-based.
class TouchError : public Error {
 public:
  TouchError(int row, const std::string& what) : Error(what), row_(row) {}
  int row() const noexcept { return row_; }

 private:
  int row_;
};

}  // namespace eigencurve
