#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fanlab {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data: non-finite entries, shape mismatches, empty matrices.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A parameter outside its documented domain (tau <= 0, alpha < 0, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller (e.g. a batch that is
// required to be row-normalized was not).
class ContractViolationError : public Error {
 public:
  using Error::Error;
};

// An iterative numerical routine exceeded its iteration cap.
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

// A row that must be normalizable has (near-)zero norm; carries the row index.
class DegenerateRowError : public Error {
 public:
  DegenerateRowError(const std::string& msg, std::size_t row)
      : Error(msg), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A spectrum that must be usable is empty or collapsed.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

// Training hit a non-finite loss or non-finite parameters; carries the step.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, std::size_t step)
      : Error(msg), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Text input (CSV, config file) could not be parsed; carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fanlab
