#include "climatescope/error.hpp"

#include <utility>

namespace climatescope {

namespace {

std::string with_position(const std::string& what, std::size_t row, std::size_t column) {
  if (row == 0 && column == 0) {
    return what;
  }
  return what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")";
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t row, std::size_t column)
    : Error(with_position(what, row, column)), row_(row), column_(column) {}

DegenerateColumnError::DegenerateColumnError(std::string variable)
    : DataError("degenerate column '" + variable + "': zero variance"),
      variable_(std::move(variable)) {}

}  // namespace climatescope
