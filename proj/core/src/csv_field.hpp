#pragma once

#include <string>

namespace climatescope::detail {

/// Wraps a field in double quotes when it holds a comma or quote.
inline std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace climatescope::detail
