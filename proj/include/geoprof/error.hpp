#pragma once

#include <stdexcept>
#include <string>

namespace geoprof {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range input to a pure function.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. |lat| > 84).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// CSV header does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A single CSV row could not be parsed.
class RowError : public Error {
 public:
  RowError(std::size_t row, std::string column, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + column + ": " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Parsed data is internally inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Grid index or point outside the grid.
class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

/// Surfaces that should share a grid do not, or weights are invalid.
class CombineError : public Error {
 public:
  using Error::Error;
};

/// Every cell of a posterior underflowed to zero.
class DegenerateSurfaceError : public Error {
 public:
  using Error::Error;
};

class MissingPriorError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoprof
