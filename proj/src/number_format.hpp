#pragma once

#include <cstdio>
#include <string>

namespace otp::detail {

// Shortest stable text for CSV output; identical doubles always print identically.
inline std::string format_number(double value, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
  return buf;
}

}  // namespace otp::detail
