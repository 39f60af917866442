#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lrsim {

/// Base of all library errors. Precondition violations on arguments throw
/// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A CSV row that failed to parse. `row` is 1-based and counts the header.
class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}
  [[nodiscard]] std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Invalid parameter file or parameter combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Optimizer failure, infeasible constraint system, overflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrsim
