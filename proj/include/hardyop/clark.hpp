#pragma once

// Clark-type measures mu_tau (Cauchy transform 1/(tau - Phi)) and the tail-limit estimate of
// singular mass.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hardyop/errors.hpp"
#include "hardyop/levelset.hpp"
#include "hardyop/measure.hpp"
#include "hardyop/phi.hpp"
#include "hardyop/quadrature.hpp"
#include "hardyop/roots.hpp"
#include "hardyop/transform.hpp"

namespace hardyop {

struct TsereteliRow {
  double y;
  double upper;  // y * |{Re G > y}|
  double lower;  // y * |{Re G < -y}|
};

struct TsereteliResult {
  double estimate = 0.0;
  double upper_limit = 0.0;
  double lower_limit = 0.0;
  double tail_gap = 0.0;  // |upper - lower| at the largest y
  bool converged = true;
  std::vector<TsereteliRow> rows;
};

inline std::vector<double> default_y_grid() { return {1e2, 1e3, 1e4, 1e5, 1e6}; }

/// lim y |{Re G > y}| = lim y |{Re G < -y}| = singular mass. Each tail is extrapolated from its
/// last two decades assuming a 1/y correction; the estimate averages the two tails.
inline TsereteliResult singular_mass_tsereteli(const CauchyTransform& g,
                                               std::vector<double> y_grid = default_y_grid()) {
  if (y_grid.size() < 2) throw PreconditionError("Tsereteli estimate needs at least two y values");
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    if (!(y_grid[i] > 0.0)) throw PreconditionError("y values must be positive");
    if (i > 0 && !(y_grid[i] > y_grid[i - 1])) throw PreconditionError("y grid must increase");
  }
  TsereteliResult r;
  for (double y : y_grid)
    r.rows.push_back({y, y * tail_set_measure(g, y, TailSide::upper),
                      y * tail_set_measure(g, y, TailSide::lower)});
  const auto& last = r.rows.back();
  const auto& prev = r.rows[r.rows.size() - 2];
  const double q = last.y / prev.y;
  auto extrap = [q](double v_prev, double v_last) {
    return std::max(0.0, (q * v_last - v_prev) / (q - 1.0));
  };
  r.upper_limit = extrap(prev.upper, last.upper);
  r.lower_limit = extrap(prev.lower, last.lower);
  r.estimate = 0.5 * (r.upper_limit + r.lower_limit);
  r.tail_gap = std::abs(last.upper - last.lower);
  r.converged = r.tail_gap <= std::max(0.1 * std::max(last.upper, last.lower), 1e-6);
  return r;
}

struct DensityTable {
  std::vector<double> x;
  std::vector<double> density;
};

struct ClarkMeasure {
  double tau = 0.0;
  RealMeasure measure;                 // atoms plus ac pieces (density evaluated from Phi)
  std::vector<DensityTable> tables;    // one per non-real interval
  double atom_mass = 0.0;
  double ac_mass = 0.0;
  double sc_mass_estimate = 0.0;       // Tsereteli estimate minus atom mass, floored at 0
  bool sc_used = false;                // atoms miss the tail limit by more than 5%
  TsereteliResult tsereteli;
  double total_mass = 0.0;
  double normalization_error = 0.0;
};

/// Real-branch roots of Phi(x) = tau with masses 1/Phi'(x); roots with Phi' >= 1e12 are dropped.
inline std::vector<Atom> clark_atoms(const PhiFunction& phi, double tau) {
  std::vector<Atom> atoms;
  for (const auto& br : phi.real_branches()) {
    if (!(br.value_left < tau && tau < br.value_right)) continue;
    const double x = roots::solve_increasing([&](double t) { return phi.real_value(t); }, br.left,
                                             br.right, tau);
    const double d = phi.derivative(x);
    if (d < 1e12) atoms.push_back({x, 1.0 / d});
  }
  return atoms;
}

/// d mu_tau / dx = Im Phi(x) / (pi |tau - Phi(x)|^2) on the non-real boundary set.
inline double clark_density(const PhiFunction& phi, double tau, double x) {
  const cplx w = phi.boundary_value(x);
  if (!(w.imag() > 0.0)) return 0.0;
  return w.imag() / (std::numbers::pi * std::norm(tau - w));
}

struct SingularPart {
  std::vector<Atom> atoms;
  double atom_mass = 0.0;
  double sc_mass = 0.0;
  bool sc_used = false;
  TsereteliResult tsereteli;
  double total() const { return atom_mass + sc_mass; }
};

/// Atoms plus the singular continuous remainder; the tail estimate only contributes when the
/// atoms fail to account for it within 5%.
inline SingularPart clark_singular_part(const PhiFunction& phi, double tau,
                                        const std::vector<double>& y_grid = default_y_grid()) {
  phi.require_unit_beta("Clark measure");
  SingularPart s;
  s.atoms = clark_atoms(phi, tau);
  for (const auto& a : s.atoms) s.atom_mass += a.mass;
  s.tsereteli = singular_mass_tsereteli(g_tau(phi, tau), y_grid);
  const double est = s.tsereteli.estimate;
  if (std::abs(est - s.atom_mass) > 0.05 * std::max(s.atom_mass, 1e-3)) {
    s.sc_used = true;
    s.sc_mass = std::max(0.0, est - s.atom_mass);
  }
  return s;
}

namespace detail {

// Midpoint rule in a variable that removes endpoint blow-up, doubled until the mass settles.
inline DensityTable tabulate_density(const std::function<double(double)>& f, const Interval& iv) {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  std::function<double(double)> map, jac;
  double t0 = 0.0, t1 = std::numbers::pi;
  if (iv.bounded()) {
    const double a = iv.lo, b = iv.hi;
    map = [a, b](double t) { return a + 0.5 * (b - a) * (1.0 - std::cos(t)); };
    jac = [a, b](double t) { return 0.5 * (b - a) * std::sin(t); };
  } else if (std::isfinite(iv.hi)) {
    const double b = iv.hi;
    t1 = half_pi;
    map = [b](double t) { return b - std::tan(half_pi - t); };
    jac = [](double t) { return 1.0 / (std::sin(t) * std::sin(t)); };
  } else if (std::isfinite(iv.lo)) {
    const double a = iv.lo;
    t1 = half_pi;
    map = [a](double t) { return a + std::tan(t); };
    jac = [](double t) { return 1.0 / (std::cos(t) * std::cos(t)); };
  } else {
    t0 = -half_pi;
    t1 = half_pi;
    map = [](double t) { return std::tan(t); };
    jac = [](double t) { return 1.0 / (std::cos(t) * std::cos(t)); };
  }
  DensityTable table;
  double prev = -1.0;
  for (int n = 64; n <= (1 << 16); n *= 2) {
    DensityTable cur;
    double mass = 0.0;
    const double h = (t1 - t0) / n;
    for (int k = 0; k < n; ++k) {
      const double t = t0 + (k + 0.5) * h;
      const double x = map(t);
      const double v = f(x);
      cur.x.push_back(x);
      cur.density.push_back(v);
      mass += v * jac(t) * h;
    }
    table = std::move(cur);
    if (prev >= 0.0 && std::abs(mass - prev) < 1e-6) break;
    prev = mass;
  }
  if (!table.x.empty() && table.x.front() > table.x.back()) {
    std::reverse(table.x.begin(), table.x.end());
    std::reverse(table.density.begin(), table.density.end());
  }
  return table;
}

}  // namespace detail

inline ClarkMeasure clark_measure(const PhiFunction& phi, double tau,
                                  const std::vector<double>& y_grid = default_y_grid()) {
  phi.require_unit_beta("Clark measure");
  ClarkMeasure cm;
  cm.tau = tau;
  SingularPart s = clark_singular_part(phi, tau, y_grid);
  cm.atom_mass = s.atom_mass;
  cm.sc_mass_estimate = s.sc_mass;
  cm.sc_used = s.sc_used;
  cm.tsereteli = s.tsereteli;
  std::vector<AcPiece> pieces;
  for (const auto& iv : phi.nonreal_intervals()) {
    auto f = [phi, tau](double x) {
      try {
        return clark_density(phi, tau, x);
      } catch (const DomainError&) {
        return 0.0;
      }
    };
    AcPiece p;
    p.left = iv.lo;
    p.right = iv.hi;
    p.kind = DensityKind::custom;
    p.custom = f;
    p.left_exponent = std::isfinite(iv.lo) ? -0.5 : 0.0;
    p.right_exponent = std::isfinite(iv.hi) ? -0.5 : 0.0;
    p.label = "clark";
    pieces.push_back(std::move(p));
    cm.tables.push_back(detail::tabulate_density(f, iv));
  }
  cm.measure = RealMeasure(s.atoms, std::move(pieces), {});
  cm.ac_mass = cm.measure.ac_mass();
  cm.total_mass = cm.atom_mass + cm.ac_mass + cm.sc_mass_estimate;
  cm.normalization_error = std::abs(cm.total_mass - 1.0);
  return cm;
}

}  // namespace hardyop
