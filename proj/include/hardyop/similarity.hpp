#pragma once

// Certificate that C_Phi is similar to an isometry when rho has compact support [c, d] and the
// one-sided limits satisfy Phi(c-) > Phi(d+): points c1 < c, d1 > d with Phi(c1) = Phi(d1) and
// Phi(d1) > d1 make every backward orbit escape with steps >= eta = Phi(d1) - d1, and the
// derivative product along such orbits is bounded.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/trigamma.hpp>

#include "hardyop/errors.hpp"
#include "hardyop/phi.hpp"
#include "hardyop/roots.hpp"

namespace hardyop {

enum class CertificateStatus { certified, hypothesis_failed, alpha_too_small };

inline const char* to_string(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::certified:
      return "certified";
    case CertificateStatus::hypothesis_failed:
      return "hypothesis_failed";
    case CertificateStatus::alpha_too_small:
      return "alpha_too_small";
  }
  return "hypothesis_failed";
}

struct SimilarityCertificate {
  CertificateStatus status = CertificateStatus::hypothesis_failed;
  double c = NAN, d = NAN;        // hull of supp rho
  double limit_left = NAN;        // Phi(c-)
  double limit_right = NAN;       // Phi(d+)
  double c1 = NAN, d1 = NAN;
  double eta = NAN;
  bool mirrored = false;          // Phi(c1) < c1 (orbits escape to +infinity)
  bool translation = false;       // rho = 0
  double k = 0.0;                 // ∫ (1 + t^2) drho
  double product_bound = INFINITY;
  bool orbit_gap_ok = false;      // sampled check Phi(x) - x >= eta off (c1, d1)
  int candidates_tried = 0;
  std::string note;
};

namespace detail {

/// log of prod_{n>=0} (1 + k/(g_r + n eta)^2)(1 + k/(g_l + n eta)^2): exact terms for n < terms,
/// then the tail sum_{n>=terms} k/(g + n eta)^2 = (k/eta^2) trigamma(terms + g/eta) as a bound.
inline double log_product_bound(double k, double eta, double g_r, double g_l, int terms = 20000) {
  if (k == 0.0) return 0.0;
  double s = 0.0;
  for (int n = 0; n < terms; ++n) {
    const double dr = g_r + n * eta, dl = g_l + n * eta;
    s += std::log1p(k / (dr * dr)) + std::log1p(k / (dl * dl));
  }
  const double t = static_cast<double>(terms);
  s += k / (eta * eta) *
       (boost::math::trigamma(t + g_r / eta) + boost::math::trigamma(t + g_l / eta));
  return s;
}

inline const Branch* branch_ending_at(const PhiFunction& phi, double x) {
  for (const auto& b : phi.real_branches())
    if (b.right == x) return &b;
  return nullptr;
}

inline const Branch* branch_starting_at(const PhiFunction& phi, double x) {
  for (const auto& b : phi.real_branches())
    if (b.left == x) return &b;
  return nullptr;
}

}  // namespace detail

inline SimilarityCertificate similarity_certificate(const PhiFunction& phi) {
  phi.require_unit_beta("similarity certificate");
  SimilarityCertificate cert;
  const auto hull = phi.support_hull();
  const auto k = phi.rho_moment();
  if (hull && !hull->bounded())
    throw PreconditionError("similarity certificate needs rho with bounded support");
  if (!k) throw PreconditionError("similarity certificate needs a finite ∫(1+t^2) drho");
  cert.k = *k;

  if (!hull) {
    // rho = 0: Phi is a translation z + alpha; orbits move by exactly |alpha|.
    const double alpha = phi.real_value(0.0);
    cert.c = cert.d = cert.c1 = cert.d1 = 0.0;
    cert.limit_left = cert.limit_right = alpha;
    cert.eta = std::abs(alpha);
    cert.mirrored = alpha < 0.0;
    cert.product_bound = 1.0;
    cert.orbit_gap_ok = alpha != 0.0;
    cert.status = alpha != 0.0 ? CertificateStatus::certified : CertificateStatus::alpha_too_small;
    cert.translation = true;
    return cert;
  }

  cert.c = hull->lo;
  cert.d = hull->hi;
  const Branch* left = detail::branch_ending_at(phi, cert.c);
  const Branch* right = detail::branch_starting_at(phi, cert.d);
  if (!left || !right || !std::isinf(left->left) || !std::isinf(right->right))
    throw UnsupportedStructure("outer real branches (-inf, c) and (d, inf) are not declared");
  cert.limit_left = left->value_right;
  cert.limit_right = right->value_left;
  if (!(cert.limit_left > cert.limit_right)) {
    cert.status = CertificateStatus::hypothesis_failed;
    cert.note = "Phi(c-) <= Phi(d+)";
    return cert;
  }

  auto f = [&phi](double x) { return phi.real_value(x); };
  const double scale = std::max(1.0, cert.d - cert.c);
  struct Candidate {
    double c1, d1, eta, logb;
    bool mirrored;
  };
  std::optional<Candidate> best;
  for (int j = -60; j <= 60; ++j) {
    const double delta = scale * std::pow(10.0, j / 10.0);
    // Orbits escaping to -infinity: Phi(d1) > d1.
    const double d1 = cert.d + delta;
    const double v = f(d1);
    if (v > d1 && v < cert.limit_left && v > left->value_left) {
      ++cert.candidates_tried;
      const double c1 = roots::solve_increasing(f, left->left, left->right, v);
      const double eta = v - d1;
      const double lb = detail::log_product_bound(cert.k, eta, d1 - cert.d, cert.c - c1);
      if (!best || lb < best->logb) best = Candidate{c1, d1, eta, lb, false};
    }
    // Mirror: Phi(c1) < c1, orbits escape to +infinity.
    const double c1m = cert.c - delta;
    const double w = f(c1m);
    if (w < c1m && w > cert.limit_right && w < right->value_right) {
      ++cert.candidates_tried;
      const double d1m = roots::solve_increasing(f, right->left, right->right, w);
      const double eta = c1m - w;
      const double lb = detail::log_product_bound(cert.k, eta, d1m - cert.d, cert.c - c1m);
      if (!best || lb < best->logb) best = Candidate{c1m, d1m, eta, lb, true};
    }
  }
  if (!best) {
    cert.status = CertificateStatus::alpha_too_small;
    cert.note = "no d1 with Phi(d1) > d1 (or mirror) on the search grid";
    return cert;
  }
  cert.c1 = best->c1;
  cert.d1 = best->d1;
  cert.eta = best->eta;
  cert.mirrored = best->mirrored;
  cert.product_bound = std::exp(best->logb);

  // Sampled check of the escape step off (c1, d1).
  bool ok = true;
  for (int j = 0; j <= 200 && ok; ++j) {
    const double off = scale * (std::pow(10.0, j / 25.0) - 1.0);
    for (double x : {cert.d1 + off, cert.c1 - off}) {
      const double step = cert.mirrored ? x - f(x) : f(x) - x;
      if (step < cert.eta * (1.0 - 1e-9)) ok = false;
    }
  }
  cert.orbit_gap_ok = ok;
  cert.status = ok && std::isfinite(cert.product_bound) && cert.eta > 0.0
                    ? CertificateStatus::certified
                    : CertificateStatus::alpha_too_small;
  if (!ok) cert.note = "escape step below eta on the outer region";
  return cert;
}

/// t_1, ..., t_n with Phi(t_1) = t and Phi(t_{k+1}) = t_k, each taken on the outer branch that
/// keeps the orbit outside (c1, d1).
inline std::vector<double> backward_orbit(const PhiFunction& phi, const SimilarityCertificate& cert,
                                          double t, int n) {
  if (cert.status != CertificateStatus::certified)
    throw PreconditionError("backward orbit needs a certified similarity certificate");
  auto f = [&phi](double x) { return phi.real_value(x); };
  std::vector<double> orbit;
  const auto& branches = phi.real_branches();
  const Branch* left = nullptr;
  const Branch* right = nullptr;
  if (cert.translation) {
    left = right = &branches.front();
  } else {
    left = detail::branch_ending_at(phi, cert.c);
    right = detail::branch_starting_at(phi, cert.d);
  }
  const double pivot = cert.translation ? INFINITY : f(cert.d1);
  for (int step = 1; step <= n; ++step) {
    const Branch* b = nullptr;
    if (!cert.mirrored)
      b = t >= pivot ? right : left;
    else
      b = t <= pivot ? left : right;
    if (cert.translation) b = left;
    if (!(t > b->value_left && t < b->value_right)) {
      std::ostringstream os;
      os << "backward orbit breaks at step " << step << ": no outer preimage of " << t;
      throw ConvergenceError(os.str());
    }
    t = roots::solve_increasing(f, b->left, b->right, t);
    orbit.push_back(t);
  }
  return orbit;
}

}  // namespace hardyop
