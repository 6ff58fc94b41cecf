#pragma once

#include <cstdio>
#include <string>

namespace hjlab {

/// Shortest round-trip-safe text for a double: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace hjlab
