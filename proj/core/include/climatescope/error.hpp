#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace climatescope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV, documents, DOT).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0);

  // 1-based; zero when the position is not meaningful.
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Data that parses but cannot be analysed: no complete rows, duplicated
/// series, constant columns.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A zero-variance column where a varying one is required.
class DegenerateColumnError : public DataError {
 public:
  explicit DegenerateColumnError(std::string variable);
  const std::string& variable() const noexcept { return variable_; }

 private:
  std::string variable_;
};

/// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Linear solve failure, non-finite values, degenerate samples.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Reasoning backend failed (transport, timeout, malformed reply, config).
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Missing or malformed configuration (endpoint, credential variable).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A report could not be rendered, typically a missing bundle artifact.
class RenderError : public Error {
 public:
  using Error::Error;
};

}  // namespace climatescope
