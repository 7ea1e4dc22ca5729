#pragma once

#include <string>
#include <utility>
#include <variant>

#include "kfunc/constraint.hpp"
#include "kfunc/functionals.hpp"
#include "kfunc/grid.hpp"

namespace kfunc {

/// Selects the normalized weight u (sum_i w_i u_i = 1) that fixes the
/// multiplier of a constrained derivative.
///
///  - FOfRho:  u = f(rho) / sum w f(rho), the choice that yields the
///             K-conserving derivative.
///  - CustomQ: u = q / sum w q for a user field q.
///  - Point:   u = e_i0 / w_i0, the grid analog of a Dirac delta at node i0.
template <typename Scalar>
class WeightChoice {
 public:
  struct FOfRho {};
  struct CustomQ {
    Field<Scalar> q;
  };
  struct Point {
    Eigen::Index node;
  };
  using Kind = std::variant<FOfRho, CustomQ, Point>;

  static WeightChoice f_of_rho() { return WeightChoice(FOfRho{}); }
  static WeightChoice custom_q(Field<Scalar> q) { return WeightChoice(CustomQ{std::move(q)}); }
  static WeightChoice point(Eigen::Index node) { return WeightChoice(Point{node}); }

  const Kind& kind() const { return kind_; }
  bool is_f_of_rho() const { return std::holds_alternative<FOfRho>(kind_); }
  const Point* as_point() const { return std::get_if<Point>(&kind_); }

  std::string describe() const {
    if (is_f_of_rho()) return "f_of_rho";
    if (auto p = as_point()) return "point:" + std::to_string(p->node);
    return "custom_q";
  }

 private:
  explicit WeightChoice(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// The normalized weight field u for a choice at rho.
template <typename Scalar>
Field<Scalar> weight_field(const WeightChoice<Scalar>& choice, const Field<Scalar>& rho,
                           const ConstraintSpec<Scalar>& c) {
  using Choice = WeightChoice<Scalar>;
  auto normalized = [](const Field<Scalar>& q, const char* what) {
    const Scalar total = integrate(q);
    if (total == Scalar(0))
      throw Error(ErrorKind::ZeroQIntegral, std::string("integral of ") + what + " is zero");
    return q * (Scalar(1) / total);
  };
  if (choice.is_f_of_rho()) return normalized(f_values(rho, c), "f(rho)");
  if (auto p = choice.as_point()) {
    if (p->node < 0 || p->node >= rho.size())
      throw Error(ErrorKind::InvalidArgument,
                  "point weight node " + std::to_string(p->node) + " outside grid of " +
                      std::to_string(rho.size()) + " nodes");
    typename Field<Scalar>::Vector u = Field<Scalar>::Vector::Zero(rho.size());
    u[p->node] = Scalar(1) / rho.grid().weights()[p->node];
    return rho.with_values(std::move(u));
  }
  const auto& q = std::get<typename Choice::CustomQ>(choice.kind()).q;
  return normalized(rho.checked(q), "q");
}

namespace detail {

/// (1/K) sum_j w_j (f_j / f'_j) g_j: the multiplier removed by the
/// K-conserving derivative.
template <typename Scalar>
Scalar k_average(const Field<Scalar>& g, const Field<Scalar>& fv, const Field<Scalar>& fp,
                 Scalar K) {
  g.checked(fv);
  const auto& w = g.grid().weights();
  return (w.array() * fv.values().array() / fp.values().array() * g.values().array()).sum() / K;
}

}  // namespace detail

/// The K-conserving derivative of a restricted derivative density g at rho:
///
///   out_i = g_i - f'_i (1/K) sum_j w_j (f_j / f'_j) g_j
///
/// rho must lie on the constraint set. Adding any multiple of f'(rho) to g
/// leaves the result unchanged.
template <typename Scalar>
Field<Scalar> k_derivative(const Field<Scalar>& g, const Field<Scalar>& rho,
                           const ConstraintSpec<Scalar>& c, const KTarget<Scalar>& K,
                           Scalar tol = Scalar(kConstraintTol)) {
  rho.checked(g);
  require_on_constraint(rho, c, K, tol);
  const Field<Scalar> fp = f_prime_values(rho, c);
  const Scalar mu = detail::k_average(g, f_values(rho, c), fp, K.value());
  return g - fp * mu;
}

/// The constrained derivative for a general normalized weight u:
///
///   out_i = g_i - f'_i sum_j w_j (u_j / f'_j) g_j
///
/// For a point weight the sum collapses to g_i0 / f'_i0 and the output at
/// i0 is exactly zero.
template <typename Scalar>
Field<Scalar> u_derivative(const Field<Scalar>& g, const Field<Scalar>& rho,
                           const ConstraintSpec<Scalar>& c, const WeightChoice<Scalar>& choice) {
  rho.checked(g);
  const Field<Scalar> fp = f_prime_values(rho, c);
  if (auto p = choice.as_point()) {
    weight_field(choice, rho, c);  // validates the node
    const Scalar mu = g[p->node] / fp[p->node];
    typename Field<Scalar>::Vector out = g.values() - fp.values() * mu;
    out[p->node] = Scalar(0);
    return rho.with_values(std::move(out));
  }
  const Field<Scalar> u = weight_field(choice, rho, c);
  const auto& w = rho.grid().weights();
  const Scalar mu = (w.array() * u.values().array() / fp.values().array() * g.values().array()).sum();
  return g - fp * mu;
}

/// Projects a change delta onto sum_i w_i f'_i delta_i = 0:
///
///   out_i = delta_i - (u_i / f'_i) sum_j w_j f'_j delta_j
///
/// with u = f(rho)/K for the f_of_rho choice. Under the quadrature inner
/// product this is the transpose of u_derivative for the same weight.
template <typename Scalar>
Field<Scalar> project_change(const Field<Scalar>& delta, const Field<Scalar>& rho,
                             const ConstraintSpec<Scalar>& c, const KTarget<Scalar>& K,
                             const WeightChoice<Scalar>& choice,
                             Scalar tol = Scalar(kConstraintTol)) {
  rho.checked(delta);
  require_on_constraint(rho, c, K, tol);
  const Field<Scalar> fp = f_prime_values(rho, c);
  const Field<Scalar> u =
      choice.is_f_of_rho() ? f_values(rho, c) * (Scalar(1) / K.value()) : weight_field(choice, rho, c);
  const Scalar flux = inner(fp, delta);
  return rho.with_values(delta.values() -
                         (u.values().array() / fp.values().array() * flux).matrix());
}

/// sum_i w_i (f_i / f'_i) g_i - m A[rho]. Zero when A is K-homogeneous of
/// degree m for this constraint.
template <typename Scalar>
Scalar homogeneity_residual(const Functional<Scalar>& A, const Field<Scalar>& rho,
                            const ConstraintSpec<Scalar>& c, Scalar m) {
  const Field<Scalar> g = gradient(A, rho);
  const Field<Scalar> fp = f_prime_values(rho, c);
  return detail::k_average(g, f_values(rho, c), fp, Scalar(1)) - m * A(rho);
}

}  // namespace kfunc
