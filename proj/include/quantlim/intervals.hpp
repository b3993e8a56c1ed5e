#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace quantlim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One coordinate interval; either endpoint may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool operator==(const Interval&) const = default;
};

// Axis-aligned rectangle: one Interval per coordinate.
using Rect = std::vector<Interval>;

// Membership uses the half-open convention [lo, hi) on every axis; the
// boundary has zero probability under every continuous model, so any
// deterministic rule works, and this one never double-assigns a point.
inline bool half_open_contains(const Interval& iv, double x) {
  return iv.lo <= x && x < iv.hi;
}

inline bool rect_contains(const Rect& r, const double* x) {
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!half_open_contains(r[k], x[k])) return false;
  }
  return true;
}

// Positive-measure overlap test for half-open rectangles of equal dimension.
inline bool rects_overlap(const Rect& a, const Rect& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k].lo < b[k].hi && b[k].lo < a[k].hi)) return false;
  }
  return true;
}

}  // namespace quantlim
