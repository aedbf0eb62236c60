#pragma once

// Lebesgue measure of preimage sets {Phi(x) in (a,b)}, {Phi(x) in D_{a,b}} and of the
// tail sets {Re G > y}, {Re G < -y}, plus a Monte Carlo oracle for all three.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "hardyop/errors.hpp"
#include "hardyop/interval_set.hpp"
#include "hardyop/phi.hpp"
#include "hardyop/roots.hpp"
#include "hardyop/transform.hpp"

namespace hardyop {

/// Open disk with diameter (a, b) on the real axis.
struct DiskQuery {
  double a;
  double b;

  DiskQuery(double a_, double b_) : a(a_), b(b_) {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
      throw PreconditionError("disk query needs finite a < b");
  }
  double center() const { return 0.5 * (a + b); }
  double radius() const { return 0.5 * (b - a); }
  bool contains(cplx w) const { return std::abs(w - center()) < radius(); }
};

struct PreimageResult {
  IntervalSet set;
  double total = 0.0;
};

enum class TailSide { upper, lower };

namespace detail {

/// Sampling density for scans of sets {f > 0} on cells where no monotonicity is available.
struct ScanOptions {
  int uniform = 256;
  int geometric = 28;  // end clustering at relative offsets 10^{-j/2}, j = 2..geometric
  int max_depth = 60;
};

// Positive part of f on [x0, x1] given the end values, appended to out.
template <class F>
void scan_panel(F& f, double x0, double f0, double x1, double f1, int depth,
                const ScanOptions& opt, std::vector<Interval>& out) {
  const bool p0 = f0 > 0.0, p1 = f1 > 0.0;
  const double mid = 0.5 * (x0 + x1);
  const bool splittable = mid > x0 && mid < x1 && depth < opt.max_depth;
  if (p0 != p1) {
    // Bracketed crossing; bisect on sign to full precision.
    double lo = x0, hi = x1;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      if (!(m > lo && m < hi)) break;
      if ((f(m) > 0.0) == p0)
        lo = m;
      else
        hi = m;
    }
    const double root = 0.5 * (lo + hi);
    if (p0)
      out.push_back({x0, root});
    else
      out.push_back({root, x1});
    return;
  }
  if (!splittable) {
    if (p0) out.push_back({x0, x1});
    return;
  }
  // Same sign: accept when the midpoint value is between the end values (monotone panel),
  // otherwise the panel may hide an excursion and is split.
  const double fm = f(mid);
  const bool monotone = (fm >= std::min(f0, f1) && fm <= std::max(f0, f1)) && ((fm > 0.0) == p0);
  if (monotone) {
    if (p0) out.push_back({x0, x1});
    return;
  }
  scan_panel(f, x0, f0, mid, fm, depth + 1, opt, out);
  scan_panel(f, mid, fm, x1, f1, depth + 1, opt, out);
}

/// Positive set of f on the bounded interval (lo, hi), never evaluating f at lo, hi or any split
/// point. Slivers between an end and its nearest sample take that sample's sign.
template <class F>
void scan_positive(F& f, double lo, double hi, const std::vector<double>& splits,
                   std::vector<Interval>& out, const ScanOptions& opt = {}) {
  std::vector<double> cuts{lo};
  for (double s : splits)
    if (s > lo && s < hi) cuts.push_back(s);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double p = cuts[c], q = cuts[c + 1];
    const double len = q - p;
    std::vector<double> xs;
    for (int k = 1; k <= opt.uniform; ++k) xs.push_back(p + len * k / (opt.uniform + 1.0));
    for (int j = 2; j <= opt.geometric; ++j) {
      const double d = len * std::pow(10.0, -0.5 * j);
      xs.push_back(p + d);
      xs.push_back(q - d);
    }
    std::erase_if(xs, [&](double x) { return !(x > p && x < q); });
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.empty()) continue;
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);
    if (fs.front() > 0.0) out.push_back({p, xs.front()});
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      scan_panel(f, xs[i], fs[i], xs[i + 1], fs[i + 1], 0, opt, out);
    if (fs.back() > 0.0) out.push_back({xs.back(), q});
  }
}

/// Push an infinite end of a cell out until f stays nonpositive: three successive doublings
/// outside the set and |x| beyond `min_abs`. `dir` is -1 for the left end.
template <class F>
double clip_end(F& f, double anchor, int dir, double min_abs) {
  int outside = 0;
  double step = 1.0;
  double x = anchor;
  while (true) {
    x = anchor + dir * step;
    if (std::abs(x) > 1e8) {
      std::ostringstream os;
      os << "level set does not close up within |x| <= 1e8 (direction " << dir << ")";
      throw ConvergenceError(os.str());
    }
    if (f(x) > 0.0)
      outside = 0;
    else
      ++outside;
    if (outside >= 3 && std::abs(x) > min_abs) return x;
    step *= 2.0;
  }
}

/// Scan over (lo, hi) where either end may be infinite.
template <class F>
void scan_cell(F& f, double lo, double hi, const std::vector<double>& splits, double min_abs,
               std::vector<Interval>& out, const ScanOptions& opt = {}) {
  if (!std::isfinite(lo) && !std::isfinite(hi)) {
    lo = clip_end(f, 0.0, -1, min_abs);
    hi = clip_end(f, 0.0, +1, min_abs);
    std::vector<double> s = splits;
    s.push_back(0.0);
    scan_positive(f, lo, hi, s, out, opt);
    return;
  }
  if (!std::isfinite(lo)) lo = clip_end(f, hi, -1, min_abs);
  if (!std::isfinite(hi)) hi = clip_end(f, lo, +1, min_abs);
  scan_positive(f, lo, hi, splits, out, opt);
}

// Interval where an increasing g exceeds (upper) or falls below (lower) target on (lo, hi),
// with one-sided limits glo, ghi.
template <class G>
void monotone_part(G& g, double lo, double hi, double glo, double ghi, double target, bool above,
                   std::vector<Interval>& out) {
  if (above) {
    if (ghi <= target) return;
    if (glo >= target) {
      out.push_back({lo, hi});
      return;
    }
    out.push_back({roots::solve_increasing(g, lo, hi, target), hi});
  } else {
    if (glo >= target) return;
    if (ghi <= target) {
      out.push_back({lo, hi});
      return;
    }
    out.push_back({lo, roots::solve_increasing(g, lo, hi, target)});
  }
}

inline PreimageResult finish(std::vector<Interval> pieces) {
  PreimageResult r;
  r.set = IntervalSet(std::move(pieces));
  r.total = r.set.total_length();
  return r;
}

// Interval pieces of {x on real branches : Phi(x) in (a, b)}.
inline void branch_preimages(const PhiFunction& phi, double a, double b,
                             std::vector<Interval>& out) {
  auto f = [&phi](double x) { return phi.real_value(x); };
  for (const auto& br : phi.real_branches()) {
    if (!(std::min(b, br.value_right) > std::max(a, br.value_left))) continue;
    const double lo = a <= br.value_left ? br.left : roots::solve_increasing(f, br.left, br.right, a);
    const double hi = b >= br.value_right ? br.right : roots::solve_increasing(f, br.left, br.right, b);
    if (hi > lo) out.push_back({lo, hi});
  }
}

inline std::vector<double> interior_exceptional(const PhiFunction& phi, const Interval& iv) {
  std::vector<double> out;
  for (double e : phi.exceptional_points())
    if (iv.contains(e)) out.push_back(e);
  return out;
}

// {x in non-real cells : |Phi(x) - center| < radius}, also reusable with other membership tests.
template <class F>
void nonreal_scan(const PhiFunction& phi, F& f, double min_abs, std::vector<Interval>& out,
                  const ScanOptions& opt = {}) {
  for (const auto& iv : phi.nonreal_intervals())
    scan_cell(f, iv.lo, iv.hi, interior_exceptional(phi, iv), min_abs, out, opt);
}

}  // namespace detail

/// {x : Phi(x) in (a, b)}: one bisection-found interval per real branch; non-real boundary
/// values never lie in a real interval.
inline PreimageResult preimage_interval_measure(const PhiFunction& phi, double a, double b) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw PreconditionError("preimage interval needs finite a < b");
  std::vector<Interval> pieces;
  detail::branch_preimages(phi, a, b, pieces);
  return detail::finish(std::move(pieces));
}

/// {x : Phi(x) in D_{a,b}}: the interval preimage plus the part of the non-real boundary set
/// whose values fall in the open disk.
inline PreimageResult preimage_disk_set(const PhiFunction& phi, const DiskQuery& q,
                                        const detail::ScanOptions& opt = {}) {
  std::vector<Interval> pieces;
  detail::branch_preimages(phi, q.a, q.b, pieces);
  const double c = q.center(), r = q.radius();
  auto inside = [&](double x) { return r - std::abs(phi.boundary_value(x) - c); };
  detail::nonreal_scan(phi, inside, 2.0 * (std::abs(c) + r), pieces, opt);
  return detail::finish(std::move(pieces));
}

inline double preimage_disk_measure(const PhiFunction& phi, const DiskQuery& q) {
  return preimage_disk_set(phi, q).total;
}

/// {x : Re G(x) > y} (upper) or {x : Re G(x) < -y} (lower).
inline PreimageResult tail_set(const CauchyTransform& g, double y, TailSide side,
                               const detail::ScanOptions& opt = {}) {
  if (!(y > 0.0) || !std::isfinite(y)) throw PreconditionError("tail level y must be positive");
  const bool upper = side == TailSide::upper;
  const double target = upper ? y : -y;
  std::vector<Interval> pieces;
  if (g.from_measure()) {
    const auto& mu = g.measure();
    auto greal = [&mu](double x) { return mu.cauchy(x, 0.0).real(); };
    auto excess = [&](double x) { return upper ? greal(x) - y : -y - greal(x); };
    const double min_abs = 2.0 * mu.total_mass() / y + 1.0;
    for (const auto& cell : g.cells()) {
      if (cell.ac) {
        std::vector<Interval> local;
        detail::scan_cell(excess, cell.lo, cell.hi, {}, min_abs, local, opt);
        pieces.insert(pieces.end(), local.begin(), local.end());
      } else {
        detail::monotone_part(greal, cell.lo, cell.hi, cell.g_lo, cell.g_hi, target, upper, pieces);
      }
    }
    return detail::finish(std::move(pieces));
  }
  // G_tau = 1/(tau - Phi): on each branch split at the root of Phi = tau; G_tau is increasing on
  // both sides.
  const auto& phi = g.phi();
  const double tau = g.tau();
  auto gt = [&](double x) { return 1.0 / (tau - phi.real_value(x)); };
  auto inv = [tau](double v) { return std::isfinite(v) ? 1.0 / (tau - v) : 0.0; };
  // A branch end where Phi tends to tau itself: G_tau blows up with the sign of tau - Phi.
  auto lim_lo = [&](double v) { return v == tau ? -INFINITY : inv(v); };
  auto lim_hi = [&](double v) { return v == tau ? INFINITY : inv(v); };
  for (const auto& br : phi.real_branches()) {
    if (br.value_left < tau && tau < br.value_right) {
      const double root = roots::solve_increasing([&](double x) { return phi.real_value(x); },
                                                  br.left, br.right, tau);
      detail::monotone_part(gt, br.left, root, inv(br.value_left), INFINITY, target, upper, pieces);
      detail::monotone_part(gt, root, br.right, -INFINITY, inv(br.value_right), target, upper,
                            pieces);
    } else {
      detail::monotone_part(gt, br.left, br.right, lim_lo(br.value_left),
                            lim_hi(br.value_right), target, upper, pieces);
    }
  }
  auto excess = [&](double x) {
    const double re = (1.0 / (tau - phi.boundary_value(x))).real();
    return upper ? re - y : -y - re;
  };
  detail::nonreal_scan(phi, excess, 2.0 * (std::abs(tau) + 1.0 / y), pieces, opt);
  return detail::finish(std::move(pieces));
}

inline double tail_set_measure(const CauchyTransform& g, double y, TailSide side) {
  return tail_set(g, y, side).total;
}

struct McEstimate {
  double estimate;
  double stderr_;
  std::uint64_t hits;
  std::uint64_t samples;
};

/// Uniform sampling of a membership predicate on (L, R). The predicate must be false near both
/// window edges; points where it is undefined (exceptional points) count as misses.
inline McEstimate mc_oracle_measure(const std::function<bool(double)>& member, double L, double R,
                                    std::uint64_t n, std::uint64_t seed) {
  if (!(R > L) || n == 0) throw PreconditionError("Monte Carlo window needs L < R and n > 0");
  auto safe = [&](double x) {
    try {
      return member(x);
    } catch (const DomainError&) {
      return false;
    }
  };
  const double w = R - L;
  for (double e : {0.0, 1e-6, 1e-3}) {
    if (safe(L + e * w) || safe(R - e * w)) {
      std::ostringstream os;
      os << "region reaches the Monte Carlo window edge (" << L << ", " << R << "); widen it";
      throw PreconditionError(os.str());
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(L, R);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (safe(u(rng))) ++hits;
  const double nn = static_cast<double>(n);
  // Smoothed hit rate keeps the error bar nonzero when hits are 0 or n.
  const double pt = (static_cast<double>(hits) + 1.0) / (nn + 2.0);
  return {w * static_cast<double>(hits) / nn, w * std::sqrt(pt * (1.0 - pt) / nn), hits, n};
}

inline std::function<bool(double)> interval_member(const PhiFunction& phi, double a, double b) {
  return [phi, a, b](double x) {
    const cplx w = phi.boundary_value(x);
    return w.imag() == 0.0 && w.real() > a && w.real() < b;
  };
}

inline std::function<bool(double)> disk_member(const PhiFunction& phi, const DiskQuery& q) {
  return [phi, q](double x) { return q.contains(phi.boundary_value(x)); };
}

inline std::function<bool(double)> tail_member(const CauchyTransform& g, double y, TailSide side) {
  return [g, y, side](double x) {
    const double re = g.boundary(x).real();
    return side == TailSide::upper ? re > y : re < -y;
  };
}

}  // namespace hardyop
