#pragma once

// Analytic self-maps of the upper half-plane, with boundary values on the real
// line and the decomposition of the line into increasing real branches.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardyop/errors.hpp"
#include "hardyop/interval_set.hpp"
#include "hardyop/measure.hpp"
#include "hardyop/roots.hpp"

namespace hardyop {

/// Maximal open interval on which the boundary function is real, analytic and increasing.
struct Branch {
  double left;
  double right;
  double value_left;   // limit of the boundary function at left+ (may be infinite)
  double value_right;  // limit at right- (may be infinite)

  bool contains(double x) const { return x > left && x < right; }
};

/// alpha + beta z + ∫ (1 + t z)/(t - z) drho(t).
struct NevanlinnaData {
  double alpha = 0.0;
  double beta = 1.0;
  RealMeasure rho;
};

class PhiModel {
 public:
  virtual ~PhiModel() = default;

  virtual cplx eval(cplx z) const = 0;
  virtual cplx derivative(cplx z) const = 0;
  /// Boundary value at a non-exceptional real point; imaginary part exactly 0 on branches.
  virtual cplx boundary(double x) const = 0;
  /// Boundary value at a point known to lie on a real branch.
  virtual double real_value(double x) const { return boundary(x).real(); }
  virtual double real_derivative(double x) const = 0;
  virtual double beta() const { return 1.0; }
  /// Hull of the set where the boundary function may leave the real line (supp rho).
  virtual std::optional<Interval> support_hull() const = 0;
  /// ∫ (1 + t^2) drho(t) when finite and known.
  virtual std::optional<double> rho_moment() const = 0;
  virtual std::string describe() const = 0;
  virtual int composition_depth() const { return 1; }

  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<double>& exceptional_points() const { return exceptional_; }

 protected:
  std::vector<Branch> branches_;
  std::vector<double> exceptional_;  // atoms of rho and poles: no boundary value
};

/// Value handle over an immutable model; cheap to copy and safe to share across threads.
class PhiFunction {
 public:
  explicit PhiFunction(std::shared_ptr<const PhiModel> model) : model_(std::move(model)) {
    const auto& br = model_->branches();
    double cursor = -INFINITY;
    for (const auto& b : br) {
      if (b.left > cursor) nonreal_.push_back({cursor, b.left});
      cursor = std::max(cursor, b.right);
    }
    if (cursor < INFINITY) nonreal_.push_back({cursor, INFINITY});
  }

  cplx eval(cplx z) const {
    if (!(z.imag() > 0.0)) {
      std::ostringstream os;
      os << "Phi evaluated at " << z << " outside the open upper half-plane";
      throw DomainError(os.str());
    }
    return model_->eval(z);
  }

  cplx boundary_value(double x) const {
    check_regular(x);
    if (branch_index(x)) return {model_->real_value(x), 0.0};
    return model_->boundary(x);
  }

  /// Unchecked real boundary value for x on a branch.
  double real_value(double x) const { return model_->real_value(x); }

  cplx derivative(cplx z) const {
    if (!(z.imag() > 0.0)) throw DomainError("derivative requires Im z > 0 (use a real branch point)");
    return model_->derivative(z);
  }

  double derivative(double x) const {
    if (!branch_index(x)) {
      std::ostringstream os;
      os << "x = " << x << " is not inside a real branch";
      throw DomainError(os.str());
    }
    return model_->real_derivative(x);
  }

  const std::vector<Branch>& real_branches() const { return model_->branches(); }
  const std::vector<double>& exceptional_points() const { return model_->exceptional_points(); }

  /// Components of the complement of the branches that have positive length.
  const std::vector<Interval>& nonreal_intervals() const { return nonreal_; }

  std::optional<std::size_t> branch_index(double x) const {
    const auto& br = model_->branches();
    auto it = std::upper_bound(br.begin(), br.end(), x,
                               [](double v, const Branch& b) { return v < b.right; });
    if (it != br.end() && it->contains(x)) return static_cast<std::size_t>(it - br.begin());
    return std::nullopt;
  }

  std::optional<Interval> support_hull() const { return model_->support_hull(); }
  std::optional<double> rho_moment() const { return model_->rho_moment(); }
  double beta() const { return model_->beta(); }
  std::string describe() const { return model_->describe(); }
  int composition_depth() const { return model_->composition_depth(); }
  const PhiModel& model() const { return *model_; }

  /// Finite one-sided limits of the boundary function at branch ends.
  std::vector<double> critical_values() const {
    std::vector<double> out;
    for (const auto& b : real_branches()) {
      if (std::isfinite(b.value_left)) out.push_back(b.value_left);
      if (std::isfinite(b.value_right)) out.push_back(b.value_right);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void require_unit_beta(const char* op) const {
    if (beta() != 1.0) {
      std::ostringstream os;
      os << op << " requires beta = 1 (composition operator a contraction); got beta = " << beta();
      throw PreconditionError(os.str());
    }
  }

 private:
  void check_regular(double x) const {
    const auto& ex = model_->exceptional_points();
    if (std::binary_search(ex.begin(), ex.end(), x)) {
      std::ostringstream os;
      os << "no boundary value at exceptional point " << x;
      throw DomainError(os.str());
    }
  }

  std::shared_ptr<const PhiModel> model_;
  std::vector<Interval> nonreal_;
};

namespace detail {

inline void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Boundary limit of eval(x + iy) over y = 1e-4, 1e-6, 1e-8 with Richardson extrapolation in y.
template <class Eval>
cplx richardson_limit(Eval&& eval, double x) {
  const cplx v1 = eval(cplx(x, 1e-4));
  const cplx v2 = eval(cplx(x, 1e-6));
  const cplx v3 = eval(cplx(x, 1e-8));
  const cplx r12 = (100.0 * v2 - v1) / 99.0;
  const cplx r23 = (100.0 * v3 - v2) / 99.0;
  if (std::abs(r23 - r12) > 1e-6 * std::max(1.0, std::abs(r23))) {
    std::ostringstream os;
    os << "boundary limit at x = " << x << " did not settle: " << r12 << " vs " << r23;
    throw ConvergenceError(os.str());
  }
  return r23;
}

}  // namespace detail

class NevanlinnaModel final : public PhiModel {
 public:
  explicit NevanlinnaModel(NevanlinnaData data) : data_(std::move(data)) {
    if (!(data_.beta >= 0.0) || !std::isfinite(data_.alpha))
      throw PreconditionError("Nevanlinna data needs finite alpha and beta >= 0");
    points_ = data_.rho.point_masses();
    ac_ = RealMeasure({}, data_.rho.ac_pieces(), {});
    ac_total_ = ac_.total_mass();
    for (const auto& p : points_) exceptional_.push_back(p.position);
    detail::sort_unique(exceptional_);
    build_branches();
  }

  const NevanlinnaData& data() const { return data_; }

  cplx eval(cplx z) const override { return eval_at(z.real(), z.imag()); }

  cplx derivative(cplx z) const override {
    cplx d = data_.beta;
    for (const auto& p : points_) d += p.mass * (1.0 + p.position * p.position) /
                                       ((p.position - z) * (p.position - z));
    if (!ac_.empty()) {
      const cplx g = ac_.cauchy(z.real(), z.imag());
      d += ac_total_ + 2.0 * z * g + (1.0 + z * z) * ac_.cauchy_derivative(z);
    }
    return d;
  }

  cplx boundary(double x) const override {
    for (const auto& b : branches_)
      if (b.contains(x)) return {real_value(x), 0.0};
    return detail::richardson_limit([this](cplx z) { return eval(z); }, x);
  }

  double real_value(double x) const override { return eval_at(x, 0.0).real(); }

  double real_derivative(double x) const override { return derivative(cplx(x, 0.0)).real(); }

  double beta() const override { return data_.beta; }

  std::optional<Interval> support_hull() const override { return data_.rho.support_hull(); }

  std::optional<double> rho_moment() const override {
    const double k = data_.rho.integrate([](double t) { return 1.0 + t * t; });
    if (!std::isfinite(k)) return std::nullopt;
    return k;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "nevanlinna(alpha=" << data_.alpha << ", beta=" << data_.beta
       << ", rho mass=" << data_.rho.total_mass() << ")";
    return os.str();
  }

 private:
  cplx eval_at(double x, double y) const {
    const cplx z(x, y);
    cplx v = data_.alpha + data_.beta * z;
    for (const auto& p : points_) v += p.mass * (1.0 + p.position * z) / (p.position - z);
    if (!ac_.empty()) v += ac_total_ * z + (1.0 + z * z) * ac_.cauchy(x, y);
    return v;
  }

  void build_branches() {
    struct Element {
      double lo, hi;
      bool diverge_lo, diverge_hi;
    };
    std::vector<Element> elems;
    for (const auto& p : points_) elems.push_back({p.position, p.position, true, true});
    for (const auto& p : data_.rho.ac_pieces()) {
      const bool dl = p.kind != DensityKind::custom || p.left_exponent <= 0.0;
      const bool dr = p.kind != DensityKind::custom || p.right_exponent <= 0.0;
      elems.push_back({p.left, p.right, dl, dr});
    }
    std::sort(elems.begin(), elems.end(),
              [](const Element& a, const Element& b) { return a.lo < b.lo; });
    std::vector<Element> merged;
    for (const auto& e : elems) {
      if (!merged.empty() && e.lo <= merged.back().hi) {
        auto& m = merged.back();
        if (e.lo == m.lo) m.diverge_lo = m.diverge_lo || e.diverge_lo;
        if (e.hi > m.hi) {
          m.hi = e.hi;
          m.diverge_hi = e.diverge_hi;
        } else if (e.hi == m.hi) {
          m.diverge_hi = m.diverge_hi || e.diverge_hi;
        }
      } else {
        merged.push_back(e);
      }
    }
    double cursor = -INFINITY;
    bool cursor_diverges = true;
    auto add_gap = [&](double lo, bool dlo, double hi, bool dhi) {
      if (!(hi > lo)) return;
      Branch b{lo, hi, 0.0, 0.0};
      b.value_left = limit_value(lo, dlo, +1);
      b.value_right = limit_value(hi, dhi, -1);
      branches_.push_back(b);
    };
    for (const auto& m : merged) {
      add_gap(cursor, cursor_diverges, m.lo, m.diverge_lo);
      cursor = m.hi;
      cursor_diverges = m.diverge_hi;
    }
    add_gap(cursor, cursor_diverges, INFINITY, true);
  }

  // One-sided limit at an end of a branch; side = +1 approaches from the right.
  double limit_value(double end, bool diverges, int side) const {
    if (!std::isfinite(end)) {
      if (data_.beta > 0.0) return end;
      return real_value(end > 0 ? 1e8 : -1e8);
    }
    if (diverges) return side > 0 ? -INFINITY : INFINITY;
    const double delta = 1e-12 * std::max(1.0, std::abs(end));
    return real_value(end + side * delta);
  }

  NevanlinnaData data_;
  std::vector<Atom> points_;
  RealMeasure ac_;
  double ac_total_ = 0.0;
};

namespace catalog {

inline cplx upper(double x) { return {x, 0.0}; }

// sqrt(z - 1) sqrt(z + 1): the branch of sqrt(z^2 - 1) mapping C+ into C+.
inline cplx sqrt_pair(cplx z) { return std::sqrt(z - 1.0) * std::sqrt(z + 1.0); }

class SqrtModel final : public PhiModel {
 public:
  SqrtModel() { branches_ = {{-INFINITY, -1.0, -INFINITY, 0.0}, {1.0, INFINITY, 0.0, INFINITY}}; }
  cplx eval(cplx z) const override { return sqrt_pair(z); }
  cplx derivative(cplx z) const override { return z / sqrt_pair(z); }
  cplx boundary(double x) const override { return sqrt_pair(upper(x)); }
  double real_value(double x) const override {
    const double r = std::sqrt((x - 1.0) * (x + 1.0));
    return x > 0 ? r : -r;
  }
  double real_derivative(double x) const override { return std::abs(x) / std::sqrt(x * x - 1.0); }
  std::optional<Interval> support_hull() const override { return Interval{-1.0, 1.0}; }
  // rho = sqrt(1 - t^2) dt / (pi (1 + t^2)) on [-1, 1].
  std::optional<double> rho_moment() const override { return 0.5; }
  std::string describe() const override { return "sqrt"; }
};

class ZlogModel final : public PhiModel {
 public:
  ZlogModel() {
    branches_ = {{0.0, INFINITY, -INFINITY, INFINITY}};
    exceptional_ = {0.0};
  }
  cplx eval(cplx z) const override { return z + std::log(z); }
  cplx derivative(cplx z) const override { return 1.0 + 1.0 / z; }
  cplx boundary(double x) const override { return upper(x) + std::log(upper(x)); }
  double real_value(double x) const override { return x + std::log(x); }
  double real_derivative(double x) const override { return 1.0 + 1.0 / x; }
  std::optional<Interval> support_hull() const override { return Interval{-INFINITY, 0.0}; }
  std::optional<double> rho_moment() const override { return std::nullopt; }
  std::string describe() const override { return "zlog"; }
};

class ZloglinModel final : public PhiModel {
 public:
  explicit ZloglinModel(double alpha) : alpha_(alpha) {
    branches_ = {{-INFINITY, -1.0, -INFINITY, INFINITY}, {1.0, INFINITY, -INFINITY, INFINITY}};
    exceptional_ = {-1.0, 1.0};
  }
  cplx eval(cplx z) const override { return alpha_ + z + std::log(z - 1.0) - std::log(z + 1.0); }
  cplx derivative(cplx z) const override { return 1.0 + 1.0 / (z - 1.0) - 1.0 / (z + 1.0); }
  cplx boundary(double x) const override {
    return alpha_ + upper(x) + std::log(upper(x - 1.0)) - std::log(upper(x + 1.0));
  }
  double real_value(double x) const override {
    return alpha_ + x + std::log((x - 1.0) / (x + 1.0));
  }
  double real_derivative(double x) const override { return 1.0 + 2.0 / (x * x - 1.0); }
  std::optional<Interval> support_hull() const override { return Interval{-1.0, 1.0}; }
  // rho = dt / (1 + t^2) on [-1, 1].
  std::optional<double> rho_moment() const override { return 2.0; }
  std::string describe() const override {
    std::ostringstream os;
    os << "zloglin(alpha=" << alpha_ << ")";
    return os.str();
  }

 private:
  double alpha_;
};

class SqrtpoleModel final : public PhiModel {
 public:
  explicit SqrtpoleModel(double alpha) : alpha_(alpha) {
    branches_ = {{-INFINITY, -1.0, -INFINITY, alpha_ + 0.5}, {1.0, INFINITY, -INFINITY, INFINITY}};
    exceptional_ = {1.0};
  }
  cplx eval(cplx z) const override { return alpha_ + sqrt_pair(z) + 1.0 / (1.0 - z); }
  cplx derivative(cplx z) const override {
    return z / sqrt_pair(z) + 1.0 / ((1.0 - z) * (1.0 - z));
  }
  cplx boundary(double x) const override {
    return alpha_ + sqrt_pair(upper(x)) + 1.0 / (1.0 - x);
  }
  double real_value(double x) const override {
    const double r = std::sqrt((x - 1.0) * (x + 1.0));
    return alpha_ + (x > 0 ? r : -r) + 1.0 / (1.0 - x);
  }
  double real_derivative(double x) const override {
    return std::abs(x) / std::sqrt(x * x - 1.0) + 1.0 / ((1.0 - x) * (1.0 - x));
  }
  std::optional<Interval> support_hull() const override { return Interval{-1.0, 1.0}; }
  // sqrt's rho plus (1/2) delta_1.
  std::optional<double> rho_moment() const override { return 1.5; }
  std::string describe() const override {
    std::ostringstream os;
    os << "sqrtpole(alpha=" << alpha_ << ")";
    return os.str();
  }

 private:
  double alpha_;
};

}  // namespace catalog

/// n-fold composition of a base map; branches come from pulling back the previous stage's
/// branches through each increasing branch of the base.
class IterateModel final : public PhiModel {
 public:
  IterateModel(PhiFunction base, int n) : base_(std::move(base)), n_(n) {
    if (n < 1) throw PreconditionError("iterate needs n >= 1");
    std::vector<Branch> current = base_.real_branches();
    std::vector<double> excep = base_.exceptional_points();
    for (int k = 2; k <= n; ++k) {
      std::vector<Branch> next;
      std::vector<double> next_ex = base_.exceptional_points();
      for (const auto& b : base_.real_branches()) {
        for (const auto& prev : current) {
          auto pb = pull_back(b, prev, k - 1);
          if (pb) next.push_back(*pb);
        }
        for (double e : excep) {
          if (e > b.value_left && e < b.value_right)
            next_ex.push_back(solve_on(b, e));
        }
      }
      std::sort(next.begin(), next.end(),
                [](const Branch& a, const Branch& c) { return a.left < c.left; });
      current = std::move(next);
      detail::sort_unique(next_ex);
      excep = std::move(next_ex);
    }
    branches_ = std::move(current);
    exceptional_ = std::move(excep);
  }

  cplx eval(cplx z) const override {
    for (int k = 0; k < n_; ++k) z = base_.model().eval(z);
    return z;
  }

  cplx derivative(cplx z) const override {
    cplx d = 1.0;
    for (int k = 0; k < n_; ++k) {
      d *= base_.model().derivative(z);
      z = base_.model().eval(z);
    }
    return d;
  }

  cplx boundary(double x) const override {
    cplx w = base_.boundary_value(x);
    for (int k = 1; k < n_; ++k) {
      if (w.imag() > 0.0)
        w = base_.model().eval(w);
      else
        w = base_.boundary_value(w.real());
    }
    return w;
  }

  double real_value(double x) const override { return stage_value(x, n_); }

  double real_derivative(double x) const override {
    double d = 1.0;
    for (int k = 0; k < n_; ++k) {
      d *= base_.model().real_derivative(x);
      x = base_.real_value(x);
    }
    return d;
  }

  double beta() const override { return std::pow(base_.beta(), n_); }

  std::optional<Interval> support_hull() const override {
    double lo = INFINITY, hi = -INFINITY;
    double cursor = -INFINITY;
    for (const auto& b : branches_) {
      if (b.left > cursor) lo = std::min(lo, cursor), hi = std::max(hi, b.left);
      cursor = std::max(cursor, b.right);
    }
    if (cursor < INFINITY) lo = std::min(lo, cursor), hi = INFINITY;
    if (lo > hi) return std::nullopt;
    return Interval{lo, hi};
  }

  std::optional<double> rho_moment() const override { return std::nullopt; }

  std::string describe() const override {
    std::ostringstream os;
    os << "iterate(" << base_.describe() << ", " << n_ << ")";
    return os.str();
  }

  int composition_depth() const override { return n_ * base_.composition_depth(); }

 private:
  double stage_value(double x, int stages) const {
    for (int k = 0; k < stages; ++k) x = base_.real_value(x);
    return x;
  }

  double solve_on(const Branch& b, double target) const {
    return roots::solve_increasing([this](double x) { return base_.real_value(x); }, b.left,
                                   b.right, target);
  }

  // {x in b : base(x) in prev}, where prev is a branch of the (stages)-fold iterate.
  std::optional<Branch> pull_back(const Branch& b, const Branch& prev, int stages) const {
    const double lo_t = std::max(b.value_left, prev.left);
    const double hi_t = std::min(b.value_right, prev.right);
    if (!(hi_t > lo_t)) return std::nullopt;
    Branch out{};
    if (prev.left <= b.value_left) {
      out.left = b.left;
      out.value_left = b.value_left == prev.left ? prev.value_left
                                                 : stage_value(b.value_left, stages);
    } else {
      out.left = solve_on(b, prev.left);
      out.value_left = prev.value_left;
    }
    if (prev.right >= b.value_right) {
      out.right = b.right;
      out.value_right = b.value_right == prev.right ? prev.value_right
                                                    : stage_value(b.value_right, stages);
    } else {
      out.right = solve_on(b, prev.right);
      out.value_right = prev.value_right;
    }
    if (!(out.right > out.left)) return std::nullopt;
    return out;
  }

  PhiFunction base_;
  int n_;
};

inline PhiFunction phi_from_nevanlinna(NevanlinnaData data) {
  return PhiFunction(std::make_shared<const NevanlinnaModel>(std::move(data)));
}

inline PhiFunction identity_map() { return phi_from_nevanlinna({0.0, 1.0, {}}); }

inline PhiFunction translation(double shift) { return phi_from_nevanlinna({shift, 1.0, {}}); }

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"sqrt", "zlog", "zloglin", "sqrtpole"};
  return names;
}

/// Closed-form maps: sqrt, zlog (no parameters); zloglin, sqrtpole (parameter "alpha", default 0).
inline PhiFunction phi_from_catalog(const std::string& name,
                                    const std::map<std::string, double>& params = {}) {
  auto param = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto reject_extra = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw PreconditionError("catalog function '" + name + "' has no parameter '" + k + "'");
      if (!std::isfinite(v)) throw PreconditionError("parameter '" + k + "' must be finite");
    }
  };
  if (name == "sqrt") {
    reject_extra({});
    return PhiFunction(std::make_shared<const catalog::SqrtModel>());
  }
  if (name == "zlog") {
    reject_extra({});
    return PhiFunction(std::make_shared<const catalog::ZlogModel>());
  }
  if (name == "zloglin") {
    reject_extra({"alpha"});
    return PhiFunction(std::make_shared<const catalog::ZloglinModel>(param("alpha", 0.0)));
  }
  if (name == "sqrtpole") {
    reject_extra({"alpha"});
    return PhiFunction(std::make_shared<const catalog::SqrtpoleModel>(param("alpha", 0.0)));
  }
  throw PreconditionError("unknown catalog function '" + name + "'");
}

inline PhiFunction iterate(const PhiFunction& phi, int n) {
  if (n < 1) throw PreconditionError("iterate needs n >= 1");
  if (n == 1) return phi;
  return PhiFunction(std::make_shared<const IterateModel>(phi, n));
}

}  // namespace hardyop
