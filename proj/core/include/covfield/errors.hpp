#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covfield {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (dimension mismatch, bad count, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input text could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The data admits no meaningful answer (zero-variance column, identical points, all-zero field).
class DegenerateData : public Error {
 public:
  using Error::Error;
};

/// A kernel block stayed indefinite after the whole jitter ladder was tried.
class IllConditionedKernel : public Error {
 public:
  using Error::Error;
};

/// A computed quantity violated a sign or range that holds in exact arithmetic.
class NumericalConsistency : public Error {
 public:
  using Error::Error;
};

/// The operation is only defined for a particular dimension.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// An iterative method produced non-finite iterates.
class Divergence : public Error {
 public:
  using Error::Error;
};

/// A single FSAI row could not be built; carries the row index.
class FsaiRowError : public IllConditionedKernel {
 public:
  FsaiRowError(std::size_t row, const std::string& what)
      : IllConditionedKernel("FSAI row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace covfield
