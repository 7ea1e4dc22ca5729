#pragma once

#include <utility>

#include "kfunc/constraint.hpp"
#include "kfunc/functionals.hpp"
#include "kfunc/kderiv.hpp"

namespace kfunc {

/// A derivative density split into a conserving part and a constant (or
/// h-weighted) remainder:  g = n_part + weight * shape_part.
template <typename Scalar>
struct ShapeSplit {
  /// The number- (or L-) conserving derivative.
  Field<Scalar> n_part;
  /// Derivative with respect to the norm at fixed shape.
  Scalar shape_part;
  /// The norm N (or L).
  Scalar N;
  /// The shape n = rho / N (or L-shape l = rho / L).
  Field<Scalar> shape;
};

/// n = rho / sum w rho.
template <typename Scalar>
Field<Scalar> shape(const Field<Scalar>& rho) {
  const Scalar N = integrate(rho);
  if (N == Scalar(0)) throw Error(ErrorKind::ZeroNorm, "integral of rho is zero");
  return rho * (Scalar(1) / N);
}

/// shape_part = (1/N) sum w rho g,  n_part = g - shape_part.
template <typename Scalar>
ShapeSplit<Scalar> shape_split(const Field<Scalar>& g, const Field<Scalar>& rho) {
  rho.checked(g);
  const Scalar N = integrate(rho);
  if (N == Scalar(0)) throw Error(ErrorKind::ZeroNorm, "integral of rho is zero");
  const Scalar s = inner(rho, g) / N;
  return {g.plus_constant(-s), s, N, rho * (Scalar(1) / N)};
}

/// Split for the linear constraint sum w h rho = L, using the L-shape
/// l = rho / L:  shape_part = sum w l g,  n_part = g - h shape_part.
template <typename Scalar>
ShapeSplit<Scalar> l_split(const Field<Scalar>& g, const Field<Scalar>& rho, const Field<Scalar>& h,
                           const KTarget<Scalar>& L, Scalar tol = Scalar(kConstraintTol)) {
  using std::abs;
  rho.checked(g);
  rho.checked(h);
  const Scalar Lv = inner(h, rho);
  if (Lv == Scalar(0)) throw Error(ErrorKind::ZeroNorm, "integral of h rho is zero");
  if (!(abs(Lv - L.value()) <= tol * std::max(Scalar(1), abs(L.value()))))
    throw Error(ErrorKind::ConstraintMismatch,
                "integral of h rho = " + std::to_string(Lv) + " differs from L = " +
                    std::to_string(L.value()));
  const Field<Scalar> l = rho * (Scalar(1) / Lv);
  const Scalar s = inner(l, g);
  return {g - h * s, s, Lv, l};
}

/// Compares two routes to the number-conserving derivative scaled by N:
/// the 1-conserving derivative of B[n] = A[N n] at the shape n (with a
/// finite-difference gradient of B), and N times the n_part of
/// shape_split at rho. Returns the max-norm difference.
template <typename Scalar>
Scalar shape_crosscheck(const Functional<Scalar>& A, const Field<Scalar>& rho) {
  const Scalar N = integrate(rho);
  if (N == Scalar(0)) throw Error(ErrorKind::ZeroNorm, "integral of rho is zero");
  const Field<Scalar> n = rho * (Scalar(1) / N);
  auto B = [&A, N](const Field<Scalar>& shape_field) { return A(shape_field * N); };
  const auto unit = ConstraintSpec<Scalar>::identity();
  const Field<Scalar> via_shape =
      k_derivative(fd_gradient(B, n), n, unit, KTarget<Scalar>(Scalar(1)));
  const Field<Scalar> via_rho = shape_split(gradient(A, rho), rho).n_part * N;
  return max_abs_diff(via_shape, via_rho);
}

}  // namespace kfunc
