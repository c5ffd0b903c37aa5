#ifndef METAMAP_INTERVAL_HPP
#define METAMAP_INTERVAL_HPP

#include <algorithm>
#include <cmath>

namespace metamap {

/// Closed interval [lo, hi] on the real line (degenerate when lo == hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool empty() const { return hi <= lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains_interior(double x) const { return x > lo && x < hi; }

  /// [lo,hi] covers [other] up to slack `tol` at each endpoint.
  bool covers(const Interval& other, double tol) const {
    return lo <= other.lo + tol && hi >= other.hi - tol;
  }

  Interval intersect(const Interval& other) const {
    return {std::max(lo, other.lo), std::min(hi, other.hi)};
  }

  static Interval ordered(double a, double b) {
    return a <= b ? Interval{a, b} : Interval{b, a};
  }
};

inline double overlap_length(const Interval& a, const Interval& b) {
  double w = std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
  return w > 0.0 ? w : 0.0;
}

}  // namespace metamap

#endif
