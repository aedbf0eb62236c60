#pragma once

// Grid estimates of the closed-range constants A, B, C, D, the u_c test functions and Rayleigh
// quotients, the Boole and Letac checks, and iterated lower bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardyop/clark.hpp"
#include "hardyop/errors.hpp"
#include "hardyop/levelset.hpp"
#include "hardyop/parallel.hpp"
#include "hardyop/phi.hpp"
#include "hardyop/quadrature.hpp"
#include "hardyop/transform.hpp"

namespace hardyop {

struct Grid {
  std::vector<double> centers;
  std::vector<double> lengths;
  std::vector<double> taus;
};

/// Centers: 201 uniform points over the span of the finite branch-end values and the support
/// hull (clipped to [-20, 20]) widened by 10 on each side, plus v and v +/- 2^-k (k = 1..12) at
/// each of those anchor points. Lengths 2^0 .. 2^-10. Taus reuse the centers.
inline Grid default_grid(const PhiFunction& phi) {
  std::vector<double> anchors = phi.critical_values();
  if (auto h = phi.support_hull()) {
    anchors.push_back(std::clamp(h->lo, -20.0, 20.0));
    anchors.push_back(std::clamp(h->hi, -20.0, 20.0));
  }
  double lo = -10.0, hi = 10.0;
  if (!anchors.empty()) {
    lo = *std::min_element(anchors.begin(), anchors.end()) - 10.0;
    hi = *std::max_element(anchors.begin(), anchors.end()) + 10.0;
  }
  Grid g;
  for (int k = 0; k <= 200; ++k) g.centers.push_back(lo + (hi - lo) * k / 200.0);
  for (double v : anchors) {
    g.centers.push_back(v);
    for (int k = 1; k <= 12; ++k) {
      g.centers.push_back(v + std::ldexp(1.0, -k));
      g.centers.push_back(v - std::ldexp(1.0, -k));
    }
  }
  std::sort(g.centers.begin(), g.centers.end());
  g.centers.erase(std::unique(g.centers.begin(), g.centers.end()), g.centers.end());
  for (int k = 0; k <= 10; ++k) g.lengths.push_back(std::ldexp(1.0, -k));
  g.taus = g.centers;
  return g;
}

/// Minimum of a ratio over a grid, with its argmin and the minima over three nested subgrids
/// (central third / two thirds / all of the centers, with the longest third / two thirds / all of
/// the lengths) used as a refinement trend.
struct GridEstimate {
  double value = INFINITY;
  double a = 0.0;
  double b = 0.0;
  double tau = 0.0;
  bool boundary_argmin = false;
  std::vector<double> trend;
};

namespace detail {

inline bool in_subgrid(double v, double lo, double hi, int r) {
  const double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  return std::abs(v - m) <= r * h / 3.0 + 1e-12 * std::max(1.0, h);
}

inline GridEstimate interval_grid_min(const Grid& grid,
                                      const std::function<double(double, double)>& ratio,
                                      unsigned jobs) {
  if (grid.centers.empty() || grid.lengths.empty()) throw PreconditionError("empty grid");
  std::vector<double> lengths = grid.lengths;
  std::sort(lengths.begin(), lengths.end(), std::greater<>());
  const std::size_t nc = grid.centers.size(), nl = lengths.size();
  std::vector<double> table(nc * nl);
  parallel_for(nc * nl, jobs, [&](std::size_t k) {
    const double c = grid.centers[k / nl], len = lengths[k % nl];
    table[k] = ratio(c - 0.5 * len, c + 0.5 * len);
  });
  const auto [cmin, cmax] = std::minmax_element(grid.centers.begin(), grid.centers.end());
  GridEstimate est;
  est.trend.assign(3, INFINITY);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nl; ++j) {
      const double v = table[i * nl + j];
      const double c = grid.centers[i], len = lengths[j];
      if (v < est.value) {
        est.value = v;
        est.a = c - 0.5 * len;
        est.b = c + 0.5 * len;
        est.boundary_argmin = c == *cmin || c == *cmax;
      }
      for (int r = 1; r <= 3; ++r) {
        const std::size_t lcount = (static_cast<std::size_t>(r) * nl + 2) / 3;
        if (j < lcount && in_subgrid(c, *cmin, *cmax, r))
          est.trend[r - 1] = std::min(est.trend[r - 1], v);
      }
    }
  }
  return est;
}

}  // namespace detail

inline double interval_ratio(const PhiFunction& phi, double a, double b) {
  return preimage_interval_measure(phi, a, b).total / (b - a);
}

inline double disk_ratio(const PhiFunction& phi, double a, double b) {
  return preimage_disk_measure(phi, DiskQuery(a, b)) / (b - a);
}

/// Weighted disk ratio bounding A from above:
/// ∫_{Phi(x) in D_{a,b}} dx/(1+|Phi(x)|^2) / ∫_a^b dx/(1+x^2).
inline double a_upper_ratio(const PhiFunction& phi, double a, double b) {
  const auto set = preimage_disk_set(phi, DiskQuery(a, b)).set;
  auto w = [&phi](double x) {
    try {
      return 1.0 / (1.0 + std::norm(phi.boundary_value(x)));
    } catch (const DomainError&) {
      return 0.0;
    }
  };
  double num = 0.0;
  for (const auto& iv : set.intervals())
    num += quad::require(quad::integrate(w, iv.lo, iv.hi, {1e-13, 1e-10}), "A upper numerator");
  return num / (std::atan(b) - std::atan(a));
}

inline GridEstimate constant_B(const PhiFunction& phi, const Grid& grid, unsigned jobs = 1) {
  return detail::interval_grid_min(
      grid, [&](double a, double b) { return interval_ratio(phi, a, b); }, jobs);
}

inline GridEstimate constant_C(const PhiFunction& phi, const Grid& grid, unsigned jobs = 1) {
  return detail::interval_grid_min(
      grid, [&](double a, double b) { return disk_ratio(phi, a, b); }, jobs);
}

inline GridEstimate constant_A_grid(const PhiFunction& phi, const Grid& grid, unsigned jobs = 1) {
  phi.require_unit_beta("constant A");
  return detail::interval_grid_min(
      grid, [&](double a, double b) { return a_upper_ratio(phi, a, b); }, jobs);
}

/// D = inf over tau of the singular mass of mu_tau.
inline GridEstimate constant_D(const PhiFunction& phi, const std::vector<double>& taus,
                               unsigned jobs = 1) {
  phi.require_unit_beta("constant D");
  if (taus.empty()) throw PreconditionError("empty tau grid");
  std::vector<double> vals(taus.size());
  parallel_for(taus.size(), jobs,
               [&](std::size_t i) { vals[i] = clark_singular_part(phi, taus[i]).total(); });
  const auto [tmin, tmax] = std::minmax_element(taus.begin(), taus.end());
  GridEstimate est;
  est.trend.assign(3, INFINITY);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (vals[i] < est.value) {
      est.value = vals[i];
      est.tau = taus[i];
      est.boundary_argmin = taus[i] == *tmin || taus[i] == *tmax;
    }
    for (int r = 1; r <= 3; ++r)
      if (detail::in_subgrid(taus[i], *tmin, *tmax, r))
        est.trend[r - 1] = std::min(est.trend[r - 1], vals[i]);
  }
  return est;
}

/// u_c(z) = exp(-i c log((z - b)/(z - a))) / (z + i); |u_c(w)|^2 = exp(2 c theta_w)/|w + i|^2
/// with theta_w the angle subtended at w by (a, b).
struct TestFunctionUc {
  double a;
  double b;
  double c;

  TestFunctionUc(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
    if (!(b > a) || !(c > 0.0)) throw PreconditionError("u_c needs a < b and c > 0");
  }

  static cplx closed(cplx w) { return {w.real(), w.imag() + 0.0}; }

  double theta(cplx w) const {
    w = closed(w);
    const double t = std::arg(w - b) - std::arg(w - a);
    return std::max(0.0, t);
  }

  cplx operator()(cplx z) const {
    z = closed(z);
    const cplx L = std::log(z - b) - std::log(z - a);
    return std::exp(cplx(0.0, -c) * L) / (z + cplx(0.0, 1.0));
  }

  /// |u_c(w)|^2 exp(-2 pi c): bounded by 1/|w + i|^2, avoiding overflow for large c.
  double scaled_norm2(cplx w) const {
    return std::exp(2.0 * c * (theta(w) - std::numbers::pi)) / std::norm(closed(w) + cplx(0, 1));
  }
};

inline TestFunctionUc test_function_uc(double a, double b, double c) { return {a, b, c}; }

namespace detail {

// ∫_R g(Phi(x)) dx with g evaluated on boundary values; pieces split at branch ends and at
// branch preimages of the real jump points of g.
template <class W>
double composed_integral(const PhiFunction& phi, W&& g, const std::vector<double>& jumps) {
  const quad::Tolerance tol{1e-13, 1e-11};
  auto val = [&](double x) {
    try {
      return g(phi.boundary_value(x));
    } catch (const DomainError&) {
      return 0.0;
    }
  };
  double total = 0.0;
  for (const auto& br : phi.real_branches()) {
    std::vector<double> cuts{br.left, br.right};
    for (double j : jumps)
      if (br.value_left < j && j < br.value_right)
        cuts.push_back(roots::solve_increasing([&](double x) { return phi.real_value(x); },
                                               br.left, br.right, j));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += quad::require(quad::integrate(val, cuts[i], cuts[i + 1], tol), "Rayleigh branch");
  }
  for (const auto& iv : phi.nonreal_intervals()) {
    std::vector<double> cuts{iv.lo};
    for (double e : phi.exceptional_points())
      if (iv.contains(e)) cuts.push_back(e);
    cuts.push_back(iv.hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      if (std::isfinite(lo) && std::isfinite(hi))
        total += quad::require(quad::integrate_singular_ends(val, lo, hi, -0.5, -0.5, tol),
                               "Rayleigh non-real");
      else
        total += quad::require(quad::integrate(val, lo, hi, tol), "Rayleigh non-real");
    }
  }
  return total;
}

}  // namespace detail

/// ‖C_Phi u_c‖^2 / ‖u_c‖^2 from boundary integrals.
inline double rayleigh_quotient(const PhiFunction& phi, const TestFunctionUc& u) {
  phi.require_unit_beta("Rayleigh quotient");
  const double num = detail::composed_integral(
      phi, [&u](cplx w) { return u.scaled_norm2(w); }, {u.a, u.b});
  const double arc = std::atan(u.b) - std::atan(u.a);
  const double den = arc + std::exp(-2.0 * std::numbers::pi * u.c) * (std::numbers::pi - arc);
  return num / den;
}

/// Same quotient for a general u given by its squared modulus on the closed upper half-plane;
/// `jumps` lists real points where that modulus is discontinuous.
inline double rayleigh_quotient(const PhiFunction& phi, const std::function<double(cplx)>& norm2,
                                const std::vector<double>& jumps = {}) {
  phi.require_unit_beta("Rayleigh quotient");
  const double num = detail::composed_integral(phi, norm2, jumps);
  std::vector<double> cuts{-INFINITY};
  std::vector<double> js = jumps;
  std::sort(js.begin(), js.end());
  cuts.insert(cuts.end(), js.begin(), js.end());
  cuts.push_back(INFINITY);
  double den = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    den += quad::require(quad::integrate([&](double x) { return norm2(cplx(x, 0.0)); }, cuts[i],
                                         cuts[i + 1], {1e-13, 1e-11}),
                         "Rayleigh denominator");
  return num / den;
}

struct AUpperResult {
  double ratio;
  std::vector<double> c_values;
  std::vector<double> rayleigh;
};

/// Upper bound for A from one interval, with finite-c Rayleigh quotients as supporting evidence.
inline AUpperResult constant_A_upper(const PhiFunction& phi, double a, double b) {
  phi.require_unit_beta("constant A");
  AUpperResult r{a_upper_ratio(phi, a, b), {1.0, 4.0, 16.0}, {}};
  for (double c : r.c_values) r.rayleigh.push_back(rayleigh_quotient(phi, {a, b, c}));
  return r;
}

enum class Verdict { closed_range, not_closed_range, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::closed_range:
      return "closed_range";
    case Verdict::not_closed_range:
      return "not_closed_range";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

struct VerdictThresholds {
  double floor = 1e-3;
  double cross_gap = 0.05;
};

struct RangeReport {
  GridEstimate A_upper, B, C, D;
  std::vector<double> rayleigh_c;
  std::vector<double> rayleigh;  // finite-c quotients at the argmin interval of A
  double cross_gap = 0.0;
  Verdict verdict = Verdict::inconclusive;
  VerdictThresholds thresholds;
  Grid grid;
};

inline double cross_gap(const std::vector<double>& v) {
  double g = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      g = std::max(g, std::abs(v[i] - v[j]) / std::max({v[i], v[j], 1e-3}));
  return g;
}

/// closed_range: every estimate above the floor and mutual agreement within the gap.
/// not_closed_range: some estimate below the floor whose subgrid trend strictly decreases (or is
/// already numerically zero on every subgrid). Anything else is inconclusive.
inline Verdict decide(const std::vector<const GridEstimate*>& ests, double gap,
                      const VerdictThresholds& th) {
  double lo = INFINITY;
  for (auto* e : ests) lo = std::min(lo, e->value);
  if (lo > th.floor && gap < th.cross_gap) return Verdict::closed_range;
  for (auto* e : ests) {
    if (!(e->value < th.floor) || e->trend.size() < 3) continue;
    const auto& t = e->trend;
    const bool decreasing = t[0] > t[1] && t[1] > t[2];
    const bool vanished = t[0] < 1e-6 && t[1] < 1e-6 && t[2] < 1e-6;
    if (decreasing || vanished) return Verdict::not_closed_range;
  }
  return Verdict::inconclusive;
}

inline RangeReport closed_range_report(const PhiFunction& phi, const Grid& grid,
                                       const VerdictThresholds& th = {}, unsigned jobs = 1) {
  phi.require_unit_beta("closed-range analysis");
  RangeReport rep;
  rep.grid = grid;
  rep.thresholds = th;
  rep.B = constant_B(phi, grid, jobs);
  rep.C = constant_C(phi, grid, jobs);
  rep.A_upper = constant_A_grid(phi, grid, jobs);
  rep.D = constant_D(phi, grid.taus, jobs);
  const auto fin = constant_A_upper(phi, rep.A_upper.a, rep.A_upper.b);
  rep.rayleigh_c = fin.c_values;
  rep.rayleigh = fin.rayleigh;
  rep.cross_gap = cross_gap({rep.A_upper.value, rep.B.value, rep.C.value, rep.D.value});
  rep.verdict = decide({&rep.A_upper, &rep.B, &rep.C, &rep.D}, rep.cross_gap, th);
  return rep;
}

/// max over y and both tails of |y |{G tail}| - 1| for a singular probability measure.
inline double boole_check(const RealMeasure& mu, const std::vector<double>& ys) {
  if (!mu.is_singular()) throw PreconditionError("Boole check needs a singular measure");
  if (std::abs(mu.total_mass() - 1.0) > 1e-12)
    throw PreconditionError("Boole check needs a probability measure");
  const auto g = cauchy_transform(mu);
  double err = 0.0;
  for (double y : ys) {
    err = std::max(err, std::abs(y * tail_set_measure(g, y, TailSide::upper) - 1.0));
    err = std::max(err, std::abs(y * tail_set_measure(g, y, TailSide::lower) - 1.0));
  }
  return err;
}

/// max over intervals of ||Phi^{-1}(a, b)| - (b - a)| / (b - a) for Phi with singular rho.
inline double letac_check(const PhiFunction& phi, const std::vector<std::pair<double, double>>& ivs) {
  phi.require_unit_beta("Letac check");
  const auto* nev = dynamic_cast<const NevanlinnaModel*>(&phi.model());
  if (!nev) throw PreconditionError("Letac check needs Phi given by Nevanlinna data");
  if (!nev->data().rho.is_singular()) throw PreconditionError("Letac check needs singular rho");
  double err = 0.0;
  for (const auto& [a, b] : ivs)
    err = std::max(err, std::abs(preimage_interval_measure(phi, a, b).total - (b - a)) / (b - a));
  return err;
}

struct IteratedBound {
  double value = INFINITY;
  std::vector<double> per_n;  // B(Phi_n) for n = 1..max_depth
  int max_depth = 0;
  std::string failure;  // why the next depth could not be analysed, if it could not
};

/// min over n <= N of B(Phi_n) on a fixed grid.
inline IteratedBound similarity_lower_bound(const PhiFunction& phi, int N, const Grid& grid,
                                            unsigned jobs = 1) {
  phi.require_unit_beta("similarity lower bound");
  if (N < 1) throw PreconditionError("N must be >= 1");
  IteratedBound out;
  for (int n = 1; n <= N; ++n) {
    try {
      const double b = constant_B(iterate(phi, n), grid, jobs).value;
      out.per_n.push_back(b);
      out.value = std::min(out.value, b);
      out.max_depth = n;
    } catch (const std::exception& e) {
      out.failure = e.what();
      break;
    }
  }
  return out;
}

/// Largest Rayleigh quotient over m random u_c (a in [-5, 5], b - a in [0.05, 3], c in [0.1, 4]).
inline double contraction_check(const PhiFunction& phi, int m, std::uint64_t seed = 1) {
  phi.require_unit_beta("contraction check");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(-5.0, 5.0), ul(0.05, 3.0), uc(0.1, 4.0);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    const double a = ua(rng), len = ul(rng), c = uc(rng);
    worst = std::max(worst, rayleigh_quotient(phi, TestFunctionUc(a, a + len, c)));
  }
  return worst;
}

}  // namespace hardyop
