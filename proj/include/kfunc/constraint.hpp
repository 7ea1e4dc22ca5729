#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>

#include "kfunc/grid.hpp"

namespace kfunc {

/// A real interval with optionally open ends; infinite ends are allowed.
template <typename Scalar>
struct Interval {
  Scalar lo = -std::numeric_limits<Scalar>::infinity();
  Scalar hi = std::numeric_limits<Scalar>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  static Interval all() { return {}; }
  static Interval positive() { return {Scalar(0), std::numeric_limits<Scalar>::infinity(), true, true}; }

  bool contains(Scalar v) const {
    const bool above = lo_open ? v > lo : v >= lo;
    const bool below = hi_open ? v < hi : v <= hi;
    return above && below;
  }

  std::string describe() const {
    std::ostringstream os;
    os << (lo_open ? '(' : '[') << lo << ", " << hi << (hi_open ? ')' : ']');
    return os.str();
  }
};

/// A conservation constraint  sum_i w_i f(x_i, rho_i) = K  with an invertible,
/// strictly monotone f. Immutable after construction.
template <typename Scalar>
struct ConstraintSpec {
  using PointFn = std::function<Scalar(Scalar x, Scalar rho)>;

  std::string name;
  PointFn f;
  PointFn f_prime;
  /// Per-x inverse of f in its second argument.
  PointFn f_inv;
  Interval<Scalar> rho_domain;
  Interval<Scalar> f_range;
  bool x_dependent = false;
  /// True when f(x, rho) = h(x) rho.
  bool linear = false;

  static ConstraintSpec identity() {
    return {"identity",
            [](Scalar, Scalar r) { return r; },
            [](Scalar, Scalar) { return Scalar(1); },
            [](Scalar, Scalar y) { return y; },
            Interval<Scalar>::all(),
            Interval<Scalar>::all(),
            false,
            true};
  }

  /// f = rho^p on rho > 0.
  static ConstraintSpec power(Scalar p) {
    if (!(p > Scalar(0)))
      throw Error(ErrorKind::InvalidArgument, "power constraint needs p > 0");
    std::ostringstream name;
    name << "power:" << p;
    return {name.str(),
            [p](Scalar, Scalar r) { return std::pow(r, p); },
            [p](Scalar, Scalar r) { return p * std::pow(r, p - Scalar(1)); },
            [p](Scalar, Scalar y) { return std::pow(y, Scalar(1) / p); },
            Interval<Scalar>::positive(),
            Interval<Scalar>::positive(),
            false,
            p == Scalar(1)};
  }

  static ConstraintSpec exponential() {
    return {"exp",
            [](Scalar, Scalar r) { return std::exp(r); },
            [](Scalar, Scalar r) { return std::exp(r); },
            [](Scalar, Scalar y) { return std::log(y); },
            Interval<Scalar>::all(),
            Interval<Scalar>::positive(),
            false,
            false};
  }

  /// f = h(x) rho with h > 0 everywhere it is sampled.
  static ConstraintSpec weighted_linear(std::function<Scalar(Scalar)> h,
                                        std::string label = "linear") {
    auto positive_h = [h](Scalar x) {
      const Scalar v = h(x);
      if (!(v > Scalar(0)))
        throw Error(ErrorKind::DomainViolation, "linear constraint weight h(x) must be positive");
      return v;
    };
    return {std::move(label),
            [positive_h](Scalar x, Scalar r) { return positive_h(x) * r; },
            [positive_h](Scalar x, Scalar) { return positive_h(x); },
            [positive_h](Scalar x, Scalar y) { return y / positive_h(x); },
            Interval<Scalar>::all(),
            Interval<Scalar>::all(),
            true,
            true};
  }
};

/// The conserved value K (or L for linear constraints). Never zero.
template <typename Scalar>
class KTarget {
 public:
  explicit KTarget(Scalar value) : value_(value) {
    if (value == Scalar(0) || !std::isfinite(static_cast<double>(value)))
      throw Error(ErrorKind::ZeroK, "constraint target K must be finite and nonzero");
  }
  Scalar value() const { return value_; }

 private:
  Scalar value_;
};

/// Default tolerance for "rho lies on the constraint set"; see require_on_constraint.
inline constexpr double kConstraintTol = 1e-9;

namespace detail {

template <typename Scalar>
void check_domain(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c) {
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (!c.rho_domain.contains(rho[i])) {
      std::ostringstream os;
      os << "rho = " << rho[i] << " outside domain " << c.rho_domain.describe()
         << " of constraint " << c.name;
      throw Error(ErrorKind::DomainViolation, os.str(), static_cast<std::size_t>(i));
    }
}

}  // namespace detail

/// f(x_i, rho_i) at every node.
template <typename Scalar>
Field<Scalar> f_values(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c) {
  detail::check_domain(rho, c);
  const auto& x = rho.grid().nodes();
  typename Field<Scalar>::Vector out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) out[i] = c.f(x[i], rho[i]);
  return rho.with_values(std::move(out));
}

/// f'(x_i, rho_i) at every node; fails on the first zero.
template <typename Scalar>
Field<Scalar> f_prime_values(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c) {
  detail::check_domain(rho, c);
  const auto& x = rho.grid().nodes();
  typename Field<Scalar>::Vector out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    out[i] = c.f_prime(x[i], rho[i]);
    if (out[i] == Scalar(0))
      throw Error(ErrorKind::ZeroFPrime, "f' vanishes for constraint " + c.name,
                  static_cast<std::size_t>(i));
  }
  return rho.with_values(std::move(out));
}

/// K[rho] = sum_i w_i f(x_i, rho_i).
template <typename Scalar>
Scalar k_value(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c) {
  return integrate(f_values(rho, c));
}

/// Throws ConstraintMismatch unless |K[rho] - K| <= tol * max(1, |K|, sum w |f|).
/// The last term keeps the test meaningful when the sum cancels large terms.
template <typename Scalar>
void require_on_constraint(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c,
                           const KTarget<Scalar>& K, Scalar tol = Scalar(kConstraintTol)) {
  using std::abs;
  const Field<Scalar> fv = f_values(rho, c);
  const Scalar kv = integrate(fv);
  const Scalar scale = std::max({Scalar(1), abs(K.value()),
                                 rho.grid().weights().dot(fv.values().cwiseAbs())});
  if (!(abs(kv - K.value()) <= tol * scale)) {
    std::ostringstream os;
    os.precision(17);
    os << "rho is off the constraint set of " << c.name << ": K[rho] = " << kv
       << ", target K = " << K.value() << ", tolerance " << tol;
    throw Error(ErrorKind::ConstraintMismatch, os.str());
  }
}

/// The degree-zero extension map  rho -> f^-1( (K / K[rho]) f(rho) ).
///
/// The result always satisfies K[result] = K, reduces to rho when rho is
/// already on the constraint set, and depends on rho only through the ray
/// f^-1(lambda f(rho)), lambda > 0.
template <typename Scalar>
Field<Scalar> extend(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c,
                     const KTarget<Scalar>& K) {
  // The scale is kept in extended precision; rounding it once would bias
  // every node the same way and show up as drift in K.
  using Acc = std::conditional_t<std::is_same_v<Scalar, double>, long double, Scalar>;
  const Field<Scalar> fv = f_values(rho, c);
  const auto& w = rho.grid().weights();
  Acc kv = 0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) kv += Acc(w[i]) * Acc(fv[i]);
  if (kv == Acc(0))
    throw Error(ErrorKind::ZeroDenominator, "K[rho] = 0 for constraint " + c.name);
  const Acc scale = Acc(K.value()) / kv;
  const auto& x = rho.grid().nodes();
  typename Field<Scalar>::Vector out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const Scalar y = Scalar(scale * Acc(fv[i]));
    if (!c.f_range.contains(y)) {
      std::ostringstream os;
      os << "scaled f value " << y << " (scale " << scale << ") outside range "
         << c.f_range.describe() << " of constraint " << c.name;
      throw Error(ErrorKind::RangeViolation, os.str(), static_cast<std::size_t>(i));
    }
    out[i] = c.f_inv(x[i], y);
  }
  return rho.with_values(std::move(out));
}

/// f^-1(lambda f(rho)) node-wise: moves rho along its fiber, scaling K[rho] by lambda.
template <typename Scalar>
Field<Scalar> fiber_point(const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c, Scalar lambda) {
  const Field<Scalar> fv = f_values(rho, c);
  const auto& x = rho.grid().nodes();
  typename Field<Scalar>::Vector out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const Scalar y = lambda * fv[i];
    if (!c.f_range.contains(y))
      throw Error(ErrorKind::RangeViolation,
                  "scaled f value outside range " + c.f_range.describe() + " of " + c.name,
                  static_cast<std::size_t>(i));
    out[i] = c.f_inv(x[i], y);
  }
  return rho.with_values(std::move(out));
}

/// The renormalized path  extend(rho + eps delta). It stays on the
/// constraint set for every eps.
template <typename Scalar>
Field<Scalar> deformed_path(const Field<Scalar>& rho, const Field<Scalar>& delta, Scalar eps,
                            const ConstraintSpec<Scalar>& c, const KTarget<Scalar>& K) {
  return extend(rho + delta * eps, c, K);
}

/// Largest |f^-1(x, f(x, rho)) - rho| over the sampled nodes, and
/// whether f' keeps one strict sign there. Used to reject non-invertible
/// constraint definitions.
template <typename Scalar>
struct InvertibilityReport {
  Scalar max_roundtrip_error = 0;
  bool monotone = true;
};

template <typename Scalar>
InvertibilityReport<Scalar> check_invertibility(const ConstraintSpec<Scalar>& c,
                                                const Field<Scalar>& samples) {
  using std::abs;
  InvertibilityReport<Scalar> rep;
  const auto& x = samples.grid().nodes();
  int sign = 0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const Scalar r = samples[i];
    if (!c.rho_domain.contains(r)) continue;
    const Scalar back = c.f_inv(x[i], c.f(x[i], r));
    const Scalar err = std::isfinite(static_cast<double>(back))
                           ? abs(back - r) / std::max(Scalar(1), abs(r))
                           : std::numeric_limits<Scalar>::infinity();
    rep.max_roundtrip_error = std::max(rep.max_roundtrip_error, err);
    const Scalar d = c.f_prime(x[i], r);
    const int s = d > Scalar(0) ? 1 : (d < Scalar(0) ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) rep.monotone = false;
    if (sign == 0) sign = s;
  }
  return rep;
}

}  // namespace kfunc
