#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hardyop/errors.hpp"

namespace hardyop::roots {

/// Largest |x| the bracket search will reach before giving up.
inline constexpr double kScanLimit = 1e15;

/// Bisection on an open interval (lo, hi) with finite ends: f increasing, f(lo+) <= target <= f(hi-).
/// The ends themselves are never evaluated. Runs to full double precision.
template <class F>
double bisect_increasing(F&& f, double lo, double hi, double target) {
  for (int it = 0; it < 400; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return lo + 0.5 * (hi - lo);
}

/// Solve f(x) = target for f continuous and increasing on (lo, hi), where lo and/or hi may be
/// infinite. The caller guarantees that target lies strictly between the one-sided limits.
template <class F>
double solve_increasing(F&& f, double lo, double hi, double target) {
  const bool flo = std::isfinite(lo);
  const bool fhi = std::isfinite(hi);
  if (flo && fhi) return bisect_increasing(f, lo, hi, target);

  double anchor = flo ? lo + 1.0 : (fhi ? hi - 1.0 : target);
  auto give_up = [&](const char* side) {
    std::ostringstream os;
    os << "no bracket for target " << target << " towards " << side;
    throw ConvergenceError(os.str());
  };
  if (!flo) {
    double step = 1.0;
    double x = anchor;
    while (!(f(x) < target)) {
      hi = std::min(hi, x);
      x = anchor - step;
      step *= 2.0;
      if (std::abs(x) > kScanLimit) give_up("-infinity");
    }
    lo = x;
  }
  if (!std::isfinite(hi)) {
    const double base = std::max(anchor, lo);
    double step = 1.0;
    double x = base + step;
    while (!(f(x) >= target)) {
      lo = std::max(lo, x);
      step *= 2.0;
      x = base + step;
      if (std::abs(x) > kScanLimit) give_up("+infinity");
    }
    hi = x;
  }
  return bisect_increasing(f, lo, hi, target);
}

}  // namespace hardyop::roots
