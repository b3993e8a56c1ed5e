#pragma once

#include <cstdio>
#include <string>

namespace quantlim {

// 17 significant digits: lossless double round-trip for emitted tables.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace quantlim
