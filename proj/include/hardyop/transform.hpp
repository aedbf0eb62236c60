#pragma once

// Cauchy transforms G(z) = ∫ dmu(t)/(t - z), either of an explicit measure or in the
// form G_tau = 1/(tau - Phi) attached to a self-map of the upper half-plane.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "hardyop/errors.hpp"
#include "hardyop/measure.hpp"
#include "hardyop/phi.hpp"

namespace hardyop {

/// Component of the real line between consecutive support breakpoints of a measure.
/// On a gap the transform is real and increasing; on an ac cell it has a non-real boundary value.
struct SupportCell {
  double lo;
  double hi;
  bool ac;
  double g_lo;  // one-sided limits of G at the ends (gap cells only)
  double g_hi;
};

class CauchyTransform {
 public:
  static CauchyTransform of_measure(RealMeasure mu) {
    CauchyTransform g;
    g.mu_ = std::move(mu);
    g.build_cells();
    return g;
  }

  static CauchyTransform of_phi(PhiFunction phi, double tau) {
    phi.require_unit_beta("G_tau");
    if (!std::isfinite(tau)) throw PreconditionError("tau must be finite");
    CauchyTransform g;
    g.phi_ = std::move(phi);
    g.tau_ = tau;
    return g;
  }

  bool from_measure() const { return mu_.has_value(); }
  const RealMeasure& measure() const { return *mu_; }
  const PhiFunction& phi() const { return *phi_; }
  double tau() const { return tau_; }
  /// Mass of the represented measure (1 for G_tau).
  double total_mass() const { return mu_ ? mu_->total_mass() : 1.0; }

  cplx operator()(cplx z) const {
    if (!(z.imag() > 0.0)) throw DomainError("Cauchy transform needs Im z > 0 (use real())");
    if (mu_) return mu_->cauchy(z.real(), z.imag());
    return 1.0 / (tau_ - phi_->eval(z));
  }

  /// Value at a real point off the support, where the defining integral is proper.
  double real(double x) const {
    if (mu_) {
      if (on_support(x)) {
        std::ostringstream os;
        os << "x = " << x << " lies on the support of the measure";
        throw DomainError(os.str());
      }
      return mu_->cauchy(x, 0.0).real();
    }
    const cplx w = phi_->boundary_value(x);
    if (w.imag() != 0.0) throw DomainError("G_tau is not real at this point");
    if (w.real() == tau_) throw DomainError("G_tau has a pole at this point");
    return 1.0 / (tau_ - w.real());
  }

  /// Boundary value from the upper half-plane; defined on ac support as well.
  cplx boundary(double x) const {
    if (mu_) return mu_->cauchy(x, 0.0);
    const cplx w = phi_->boundary_value(x);
    if (w == cplx(tau_, 0.0)) throw DomainError("G_tau has a pole at this point");
    return 1.0 / (tau_ - w);
  }

  const std::vector<SupportCell>& cells() const { return cells_; }
  const std::vector<double>& breakpoints() const { return breaks_; }

  bool on_support(double x) const {
    if (std::binary_search(points_.begin(), points_.end(), x)) return true;
    for (const auto& p : mu_->ac_pieces())
      if (x >= p.left && x <= p.right) return true;
    return false;
  }

 private:
  CauchyTransform() = default;

  void build_cells() {
    for (const auto& a : mu_->point_masses()) points_.push_back(a.position);
    breaks_ = points_;
    for (const auto& p : mu_->ac_pieces()) {
      if (std::isfinite(p.left)) breaks_.push_back(p.left);
      if (std::isfinite(p.right)) breaks_.push_back(p.right);
    }
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
    std::vector<double> ends;
    ends.push_back(-INFINITY);
    ends.insert(ends.end(), breaks_.begin(), breaks_.end());
    ends.push_back(INFINITY);
    for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
      const double lo = ends[i], hi = ends[i + 1];
      if (!(hi > lo)) continue;
      SupportCell c{lo, hi, covered(lo, hi), 0.0, 0.0};
      if (!c.ac) {
        c.g_lo = end_limit(lo, +1);
        c.g_hi = end_limit(hi, -1);
      }
      cells_.push_back(c);
    }
  }

  bool covered(double lo, double hi) const {
    for (const auto& p : mu_->ac_pieces())
      if (p.left <= lo && p.right >= hi) return true;
    return false;
  }

  // Limit of G at a gap end approached from side (+1: from the right).
  double end_limit(double x, int side) const {
    if (!std::isfinite(x)) return 0.0;
    if (std::binary_search(points_.begin(), points_.end(), x)) return side > 0 ? -INFINITY : INFINITY;
    for (const auto& p : mu_->ac_pieces()) {
      const bool at_left = p.left == x && side < 0;
      const bool at_right = p.right == x && side > 0;
      if (!at_left && !at_right) continue;
      const double ex = at_left ? p.left_exponent : p.right_exponent;
      if (p.kind != DensityKind::custom || ex <= 0.0) return side > 0 ? -INFINITY : INFINITY;
    }
    const double delta = 1e-12 * std::max(1.0, std::abs(x));
    return mu_->cauchy(x + side * delta, 0.0).real();
  }

  std::optional<RealMeasure> mu_;
  std::optional<PhiFunction> phi_;
  double tau_ = 0.0;
  std::vector<double> points_;
  std::vector<double> breaks_;
  std::vector<SupportCell> cells_;
};

inline CauchyTransform cauchy_transform(RealMeasure mu) {
  return CauchyTransform::of_measure(std::move(mu));
}

inline CauchyTransform g_tau(const PhiFunction& phi, double tau) {
  return CauchyTransform::of_phi(phi, tau);
}

}  // namespace hardyop
