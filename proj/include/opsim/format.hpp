// Round-trip-exact double formatting shared by all text artifacts.
#pragma once

#include <cstdio>
#include <string>

namespace opsim {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace opsim
