#pragma once

// Finite positive Borel measures on the real line with an explicit Lebesgue
// decomposition: point masses, absolutely continuous pieces and Cantor-type
// singular continuous pieces.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardyop/errors.hpp"
#include "hardyop/interval_set.hpp"
#include "hardyop/quadrature.hpp"

namespace hardyop {

using cplx = std::complex<double>;

struct Atom {
  double position;
  double mass;
};

enum class DensityKind { uniform, arcsine, custom };

/// Absolutely continuous piece on (left, right). Ends may be infinite for custom densities.
/// Endpoint exponents p declare density ~ |t - end|^p; p < 0 triggers a singularity-removing
/// substitution in quadrature and p <= 0 means the Cauchy transform diverges at that end.
struct AcPiece {
  double left = 0.0;
  double right = 1.0;
  DensityKind kind = DensityKind::uniform;
  double scale = 1.0;  // uniform: density level; arcsine: total mass
  std::function<double(double)> custom;
  double left_exponent = 0.0;
  double right_exponent = 0.0;
  std::string label;

  double density(double t) const {
    if (!(t > left && t < right)) return 0.0;
    switch (kind) {
      case DensityKind::uniform:
        return scale;
      case DensityKind::arcsine:
        return scale / (std::numbers::pi * std::sqrt((t - left) * (right - t)));
      case DensityKind::custom:
        return custom(t);
    }
    return 0.0;
  }

  bool bounded() const { return std::isfinite(left) && std::isfinite(right); }

  /// ∫ g(t) density(t) dt over the piece.
  template <class G>
  auto integrate(G&& g, const quad::Tolerance& tol = {}) const {
    using T = std::decay_t<decltype(g(0.0))>;
    auto h = [&](double t) -> T { return g(t) * density(t); };
    if (bounded()) {
      const double pl = kind == DensityKind::arcsine ? -0.5 : left_exponent;
      const double pr = kind == DensityKind::arcsine ? -0.5 : right_exponent;
      return quad::integrate_singular_ends(h, left, right, pl, pr, tol);
    }
    return quad::integrate(h, left, right, tol);
  }
};

/// Singular continuous piece: the middle-thirds Cantor measure on [left, right] scaled to `mass`.
/// The CDF is the Cantor function resolved to `depth` ternary digits (linear below that scale);
/// integrals are Riemann-Stieltjes sums over the 2^depth cells of that resolution.
struct CantorPiece {
  double left = 0.0;
  double right = 1.0;
  double mass = 1.0;
  int depth = 16;

  double cdf(double x) const {
    if (x <= left) return 0.0;
    if (x >= right) return mass;
    double s = (x - left) / (right - left);
    double acc = 0.0;
    double w = 1.0;
    for (int k = 0; k < depth; ++k) {
      w *= 0.5;
      s *= 3.0;
      if (s < 1.0) continue;
      if (s <= 2.0) return mass * (acc + w);
      acc += w;
      s -= 2.0;
    }
    return mass * (acc + w * s);
  }

  std::vector<Atom> stieltjes_nodes() const {
    const std::size_t n = std::size_t{1} << depth;
    std::vector<Atom> out;
    out.reserve(n);
    const double cell = (right - left) * std::pow(3.0, -depth);
    const double m = mass / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      double pos = left;
      double span = right - left;
      for (int d = depth - 1; d >= 0; --d) {
        span /= 3.0;
        if ((k >> d) & 1U) pos += 2.0 * span;
      }
      out.push_back({pos + 0.5 * cell, m});
    }
    return out;
  }
};

class RealMeasure {
 public:
  RealMeasure() = default;

  RealMeasure(std::vector<Atom> atoms, std::vector<AcPiece> ac, std::vector<CantorPiece> sc)
      : atoms_(std::move(atoms)), ac_(std::move(ac)), sc_(std::move(sc)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.position < b.position; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (!(a.mass > 0.0) || !std::isfinite(a.mass) || !std::isfinite(a.position))
        throw PreconditionError("atom masses must be positive and finite");
      if (i > 0 && atoms_[i - 1].position == a.position)
        throw PreconditionError("atom positions must be pairwise distinct");
    }
    ac_mass_.reserve(ac_.size());
    for (const auto& p : ac_) {
      if (!(p.right > p.left)) throw PreconditionError("density piece needs left < right");
      if (p.kind != DensityKind::custom && !p.bounded())
        throw PreconditionError("uniform and arcsine pieces need finite ends");
      if (p.kind == DensityKind::custom && !p.custom)
        throw PreconditionError("custom density piece without a density function");
      if (!(p.scale >= 0.0)) throw PreconditionError("density scale must be nonnegative");
      check_nonnegative(p);
      ac_mass_.push_back(piece_mass(p));
    }
    for (const auto& c : sc_) {
      if (!(c.right > c.left) || !(c.mass >= 0.0) || c.depth < 1 || c.depth > 24)
        throw PreconditionError("Cantor piece needs left < right, mass >= 0, 1 <= depth <= 24");
      nodes_.push_back(std::make_shared<const std::vector<Atom>>(c.stieltjes_nodes()));
    }
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<AcPiece>& ac_pieces() const { return ac_; }
  const std::vector<CantorPiece>& sc_pieces() const { return sc_; }
  const std::vector<Atom>& stieltjes_nodes(std::size_t sc_index) const { return *nodes_[sc_index]; }

  bool empty() const { return atoms_.empty() && ac_.empty() && sc_.empty(); }
  bool is_singular() const { return ac_.empty(); }

  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.mass;
    return s;
  }
  double ac_mass() const {
    double s = 0.0;
    for (double m : ac_mass_) s += m;
    return s;
  }
  double sc_mass() const {
    double s = 0.0;
    for (const auto& c : sc_) s += c.mass;
    return s;
  }
  double singular_mass() const { return atom_mass() + sc_mass(); }
  double total_mass() const { return singular_mass() + ac_mass(); }
  double piece_mass(std::size_t i) const { return ac_mass_[i]; }

  /// mu((-inf, x]).
  double cdf(double x) const {
    double s = 0.0;
    for (const auto& a : atoms_)
      if (a.position <= x) s += a.mass;
    for (std::size_t i = 0; i < ac_.size(); ++i) {
      const auto& p = ac_[i];
      if (x <= p.left) continue;
      if (x >= p.right) {
        s += ac_mass_[i];
        continue;
      }
      switch (p.kind) {
        case DensityKind::uniform:
          s += p.scale * (x - p.left);
          break;
        case DensityKind::arcsine:
          s += p.scale * (0.5 + std::asin((2 * x - p.left - p.right) / (p.right - p.left)) /
                                    std::numbers::pi);
          break;
        case DensityKind::custom: {
          AcPiece part = p;
          part.right = x;
          part.right_exponent = 0.0;
          s += quad::require(part.integrate([](double) { return 1.0; }), "cdf");
          break;
        }
      }
    }
    for (const auto& c : sc_) s += c.cdf(x);
    return s;
  }

  /// ∫ f dmu for real- or complex-valued f.
  template <class F>
  auto integrate(F&& f, const quad::Tolerance& tol = {}) const {
    using T = std::decay_t<decltype(f(0.0))>;
    T sum{};
    for (const auto& a : atoms_) sum += f(a.position) * a.mass;
    for (const auto& p : ac_) sum += quad::require(p.integrate(f, tol), "measure integral");
    for (const auto& nodes : nodes_)
      for (const auto& a : *nodes) sum += f(a.position) * a.mass;
    return sum;
  }

  /// Every point mass the Cauchy transform sees: atoms and Stieltjes nodes, sorted.
  std::vector<Atom> point_masses() const {
    std::vector<Atom> out = atoms_;
    for (const auto& nodes : nodes_) out.insert(out.end(), nodes->begin(), nodes->end());
    std::sort(out.begin(), out.end(),
              [](const Atom& a, const Atom& b) { return a.position < b.position; });
    return out;
  }

  /// Closed convex hull of the support, if the measure is nonzero.
  std::optional<Interval> support_hull() const {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& a : atoms_) lo = std::min(lo, a.position), hi = std::max(hi, a.position);
    for (const auto& p : ac_) lo = std::min(lo, p.left), hi = std::max(hi, p.right);
    for (const auto& c : sc_) lo = std::min(lo, c.left), hi = std::max(hi, c.right);
    if (lo > hi) return std::nullopt;
    return Interval{lo, hi};
  }

  /// Cauchy transform G(z) = ∫ dmu(t)/(t - z) at z = x + iy, y >= 0. With y == 0 this is the
  /// boundary value from the upper half-plane (principal value + i*pi*density).
  cplx cauchy(double x, double y) const {
    cplx g{};
    const cplx z(x, y);
    auto point_term = [&](const Atom& a) {
      if (y == 0.0 && a.position == x) {
        std::ostringstream os;
        os << "Cauchy transform boundary value requested at point mass " << x;
        throw DomainError(os.str());
      }
      g += a.mass / (a.position - z);
    };
    for (const auto& a : atoms_) point_term(a);
    for (const auto& nodes : nodes_)
      for (const auto& a : *nodes) point_term(a);
    for (const auto& p : ac_) g += piece_cauchy(p, x, y);
    return g;
  }

  /// G'(z) = ∫ dmu(t)/(t - z)^2.
  cplx cauchy_derivative(cplx z) const {
    cplx g{};
    for (const auto& a : atoms_) g += a.mass / ((a.position - z) * (a.position - z));
    for (const auto& nodes : nodes_)
      for (const auto& a : *nodes) g += a.mass / ((a.position - z) * (a.position - z));
    for (const auto& p : ac_) {
      switch (p.kind) {
        case DensityKind::uniform:
          g += p.scale * (1.0 / (p.left - z) - 1.0 / (p.right - z));
          break;
        case DensityKind::arcsine: {
          const cplx s = std::sqrt(z - p.left) * std::sqrt(z - p.right);
          g += 0.5 * p.scale * (2.0 * z - p.left - p.right) / (s * s * s);
          break;
        }
        case DensityKind::custom:
          g += quad::require(
              p.integrate([&](double t) { return cplx(1.0) / ((t - z) * (t - z)); }),
              "Cauchy derivative");
          break;
      }
    }
    return g;
  }

  friend RealMeasure operator+(const RealMeasure& a, const RealMeasure& b) {
    std::vector<Atom> atoms = a.atoms_;
    for (const auto& at : b.atoms_) {
      auto it = std::find_if(atoms.begin(), atoms.end(),
                             [&](const Atom& x) { return x.position == at.position; });
      if (it != atoms.end())
        it->mass += at.mass;
      else
        atoms.push_back(at);
    }
    std::vector<AcPiece> ac = a.ac_;
    ac.insert(ac.end(), b.ac_.begin(), b.ac_.end());
    std::vector<CantorPiece> sc = a.sc_;
    sc.insert(sc.end(), b.sc_.begin(), b.sc_.end());
    return RealMeasure(std::move(atoms), std::move(ac), std::move(sc));
  }

  /// Scale every part by c > 0.
  RealMeasure scaled(double c) const {
    if (!(c > 0.0)) throw PreconditionError("scale factor must be positive");
    std::vector<Atom> atoms = atoms_;
    for (auto& a : atoms) a.mass *= c;
    std::vector<AcPiece> ac = ac_;
    for (auto& p : ac) {
      if (p.kind == DensityKind::custom) {
        auto f = p.custom;
        p.custom = [f, c](double t) { return c * f(t); };
      } else {
        p.scale *= c;
      }
    }
    std::vector<CantorPiece> sc = sc_;
    for (auto& s : sc) s.mass *= c;
    return RealMeasure(std::move(atoms), std::move(ac), std::move(sc));
  }

 private:
  static void check_nonnegative(const AcPiece& p) {
    if (p.kind != DensityKind::custom) return;
    const double lo = std::isfinite(p.left) ? p.left : std::min(-1e3, p.right - 1e3);
    const double hi = std::isfinite(p.right) ? p.right : std::max(1e3, p.left + 1e3);
    for (int k = 1; k < 64; ++k) {
      const double t = lo + (hi - lo) * k / 64.0;
      if (p.custom(t) < 0.0) throw PreconditionError("density must be nonnegative: " + p.label);
    }
  }

  static double piece_mass(const AcPiece& p) {
    switch (p.kind) {
      case DensityKind::uniform:
        return p.scale * (p.right - p.left);
      case DensityKind::arcsine:
        return p.scale;
      case DensityKind::custom:
        return quad::require(p.integrate([](double) { return 1.0; }), "density mass");
    }
    return 0.0;
  }

  // ∫ f(t)/(t - z) dt over one piece, z = x + iy with y >= 0 (y == 0: limit from above).
  static cplx piece_cauchy(const AcPiece& p, double x, double y) {
    const cplx z(x, y);
    // log(w - z) with the sign of the zero imaginary part fixed so y == 0 is the upper limit.
    auto log_shift = [&](double w) { return std::log(cplx(w - x, -y)); };
    switch (p.kind) {
      case DensityKind::uniform:
        return p.scale * (log_shift(p.right) - log_shift(p.left));
      case DensityKind::arcsine: {
        const cplx s = std::sqrt(cplx(x - p.left, y)) * std::sqrt(cplx(x - p.right, y));
        return -p.scale / s;
      }
      case DensityKind::custom:
        break;
    }
    const bool inside = x > p.left && x < p.right;
    const double span = p.bounded() ? p.right - p.left : 1.0;
    if (!inside || y > span) {
      auto r = p.integrate([&](double t) { return cplx(1.0) / (t - z); });
      return quad::require(r, "Cauchy transform");
    }
    // Subtract the density value at x over a window around x so the integrand stays bounded
    // as y -> 0; the subtracted part integrates in closed form.
    const double wl = p.bounded() ? p.left : std::max(p.left, x - 1.0);
    const double wr = p.bounded() ? p.right : std::min(p.right, x + 1.0);
    const double fx = p.custom(x);
    const double hstep = 1e-7 * std::max(1.0, std::abs(x));
    auto reg = [&](double t) -> cplx {
      if (y == 0.0 && std::abs(t - x) < 1e-13 * std::max(1.0, std::abs(x)))
        return (p.custom(x + hstep) - p.custom(x - hstep)) / (2 * hstep);
      return (p.custom(t) - fx) / (t - z);
    };
    const double pl = wl == p.left ? p.left_exponent : 0.0;
    const double pr = wr == p.right ? p.right_exponent : 0.0;
    cplx g = quad::require(quad::integrate_singular_ends(reg, wl, wr, pl, pr), "Cauchy window");
    g += fx * (log_shift(wr) - log_shift(wl));
    auto tail = [&](double t) { return cplx(p.custom(t)) / (t - z); };
    if (wl > p.left) g += quad::require(quad::integrate(tail, p.left, wl), "Cauchy tail");
    if (wr < p.right) g += quad::require(quad::integrate(tail, wr, p.right), "Cauchy tail");
    return g;
  }

  std::vector<Atom> atoms_;
  std::vector<AcPiece> ac_;
  std::vector<CantorPiece> sc_;
  std::vector<double> ac_mass_;
  std::vector<std::shared_ptr<const std::vector<Atom>>> nodes_;
};

namespace measures {

inline RealMeasure zero() { return {}; }

inline RealMeasure dirac(double position, double mass = 1.0) {
  return RealMeasure({{position, mass}}, {}, {});
}

inline RealMeasure atoms(std::vector<Atom> list) { return RealMeasure(std::move(list), {}, {}); }

/// Constant density on (a, b) carrying total `mass`.
inline RealMeasure uniform(double a, double b, double mass = 1.0) {
  AcPiece p;
  p.left = a;
  p.right = b;
  p.kind = DensityKind::uniform;
  p.scale = mass / (b - a);
  p.label = "uniform";
  return RealMeasure({}, {p}, {});
}

/// mass * dt / (pi sqrt((t-a)(b-t))) on (a, b).
inline RealMeasure arcsine(double a, double b, double mass = 1.0) {
  AcPiece p;
  p.left = a;
  p.right = b;
  p.kind = DensityKind::arcsine;
  p.scale = mass;
  p.label = "arcsine";
  return RealMeasure({}, {p}, {});
}

inline RealMeasure density(double a, double b, std::function<double(double)> f,
                           double left_exponent = 0.0, double right_exponent = 0.0,
                           std::string label = "custom") {
  AcPiece p;
  p.left = a;
  p.right = b;
  p.kind = DensityKind::custom;
  p.custom = std::move(f);
  p.left_exponent = left_exponent;
  p.right_exponent = right_exponent;
  p.label = std::move(label);
  return RealMeasure({}, {p}, {});
}

/// weight / (1 + t^2) on (a, b).
inline RealMeasure cauchy_weight(double a, double b, double weight = 1.0) {
  return density(a, b, [weight](double t) { return weight / (1.0 + t * t); }, 0.0, 0.0,
                 "cauchy_weight");
}

/// weight * sqrt((t-a)(b-t)) / (1 + t^2) on (a, b).
inline RealMeasure semicircle_weight(double a, double b, double weight = 1.0) {
  return density(
      a, b,
      [a, b, weight](double t) {
        const double q = (t - a) * (b - t);
        return q > 0.0 ? weight * std::sqrt(q) / (1.0 + t * t) : 0.0;
      },
      0.5, 0.5, "semicircle_weight");
}

inline RealMeasure cantor(double a, double b, double mass = 1.0, int depth = 16) {
  return RealMeasure({}, {}, {CantorPiece{a, b, mass, depth}});
}

}  // namespace measures
}  // namespace hardyop
