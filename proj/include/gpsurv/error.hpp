#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpsurv {

// Root of every error the library throws. Subclasses map onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unknown column/key in structured input.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed cell or record. `row` is 1-based over data rows (header excluded).
class ParseError : public Error {
 public:
  // `unit` names what `row` counts: CSV rows, or records in a samples file.
  ParseError(const std::string& what, std::size_t row, const std::string& unit = "row")
      : Error(what + " (" + unit + " " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Overflow or NaN in a likelihood or prior evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpsurv
