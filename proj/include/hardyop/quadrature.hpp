#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with the variable changes the
// rest of the library needs: tan-mapping for infinite ranges and a power
// substitution for integrable algebraic endpoint singularities.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <type_traits>
#include <vector>

#include "hardyop/errors.hpp"

namespace hardyop::quad {

struct Tolerance {
  double abs = 1e-10;
  double rel = 0.0;
  std::size_t max_panels = 1'000'000;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  std::size_t panels = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = kWgk[7] * fc;
  T gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kron * h, magnitude(T((kron - gauss) * h))};
}

}  // namespace detail

/// Globally adaptive GK15 on a finite interval. Never throws; inspect `converged`.
template <class F>
auto integrate_finite(F&& f, double a, double b, const Tolerance& tol = {})
    -> Result<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  Result<T> out;
  if (!(b > a)) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel<T>> active;
  std::vector<detail::Panel<T>> frozen;
  auto first = detail::gk15<T>(f, a, b);
  double err = first.error;
  T total = first.value;
  active.push(first);
  std::size_t panels = 1;
  double frozen_err = 0.0;
  while (!active.empty()) {
    const double target = std::max(tol.abs, tol.rel * detail::magnitude(total));
    if (err <= target || frozen_err > target || panels >= tol.max_panels) break;
    auto worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 64 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen_err += worst.error;
      frozen.push_back(worst);
      continue;
    }
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    ++panels;
  }
  // Re-sum from scratch to drop the running-update rounding.
  std::vector<detail::Panel<T>> all = std::move(frozen);
  while (!active.empty()) {
    all.push_back(active.top());
    active.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& p, const auto& q) { return p.a < q.a; });
  T sum{};
  double esum = 0.0;
  for (const auto& p : all) {
    sum += p.value;
    esum += p.error;
  }
  out.value = sum;
  out.error = esum;
  out.panels = panels;
  out.converged = esum <= std::max(tol.abs, tol.rel * detail::magnitude(sum)) * 1.0000001 ||
                  esum <= 1e3 * std::numeric_limits<double>::epsilon() * detail::magnitude(sum);
  return out;
}

/// Integral over (a, b) where either end may be infinite; infinite pieces use t = t0 +/- tan(theta).
template <class F>
auto integrate(F&& f, double a, double b, const Tolerance& tol = {})
    -> Result<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  const bool fa = std::isfinite(a);
  const bool fb = std::isfinite(b);
  if (fa && fb) return integrate_finite(f, a, b, tol);
  constexpr double half_pi = 0.5 * std::numbers::pi;
  if (!fa && !fb) {
    auto g = [&](double th) -> T {
      const double t = std::tan(th);
      const double c = std::cos(th);
      return f(t) * (1.0 / (c * c));
    };
    return integrate_finite(g, -half_pi, half_pi, tol);
  }
  if (fa) {
    auto g = [&](double th) -> T {
      const double c = std::cos(th);
      return f(a + std::tan(th)) * (1.0 / (c * c));
    };
    return integrate_finite(g, 0.0, half_pi, tol);
  }
  auto g = [&](double th) -> T {
    const double c = std::cos(th);
    return f(b - std::tan(th)) * (1.0 / (c * c));
  };
  return integrate_finite(g, 0.0, half_pi, tol);
}

/// Finite interval with integrable endpoint behaviour f ~ (t-a)^pl near a and (b-t)^pr near b.
/// Exponents <= -1 are not integrable; exponents >= 0 need no substitution.
template <class F>
auto integrate_singular_ends(F&& f, double a, double b, double pl, double pr,
                             const Tolerance& tol = {})
    -> Result<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  if (pl >= 0.0 && pr >= 0.0) return integrate_finite(f, a, b, tol);
  const double m = 0.5 * (a + b);
  const double ql = pl < 0.0 ? 1.0 / (1.0 + pl) : 1.0;
  const double qr = pr < 0.0 ? 1.0 / (1.0 + pr) : 1.0;
  Tolerance half = tol;
  half.abs *= 0.5;
  auto gl = [&](double u) -> T {
    const double up = std::pow(u, ql);
    return f(a + (m - a) * up) * ((m - a) * ql * up / u);
  };
  auto gr = [&](double u) -> T {
    const double up = std::pow(u, qr);
    return f(b - (b - m) * up) * ((b - m) * qr * up / u);
  };
  auto left = integrate_finite(gl, 0.0, 1.0, half);
  auto right = integrate_finite(gr, 0.0, 1.0, half);
  Result<T> out;
  out.value = left.value + right.value;
  out.error = left.error + right.error;
  out.panels = left.panels + right.panels;
  out.converged = left.converged && right.converged;
  return out;
}

/// Throwing wrapper: returns the value or raises ConvergenceError with context.
template <class T>
T require(const Result<T>& r, const char* what) {
  if (!r.converged) {
    std::ostringstream os;
    os << "quadrature did not converge (" << what << "): error estimate " << r.error << " after "
       << r.panels << " panels";
    throw ConvergenceError(os.str());
  }
  return r.value;
}

}  // namespace hardyop::quad
