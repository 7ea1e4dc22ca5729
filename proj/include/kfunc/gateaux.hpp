#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "kfunc/constraint.hpp"
#include "kfunc/functionals.hpp"
#include "kfunc/kderiv.hpp"

namespace kfunc {

template <typename Scalar>
struct DirectionalOptions {
  /// Strictly decreasing positive steps.
  std::vector<Scalar> eps_schedule{Scalar(1e-3), Scalar(5e-4)};
  /// The finest estimate and the extrapolated value must agree within
  /// tol * max(1, |value|).
  Scalar tol = Scalar(1e-6);
  /// Throw NotConverged instead of returning an unconverged probe.
  bool require_convergence = true;
  Scalar constraint_tol = Scalar(kConstraintTol);
};

/// Result of a deformed directional derivative along extend(rho + eps delta).
template <typename Scalar>
struct PathProbe {
  std::vector<Scalar> eps_schedule;
  /// Central-difference estimate per eps.
  std::vector<Scalar> estimates;
  /// ||extend(rho + eps delta) - rho|| / eps (quadrature 2-norm) per eps.
  std::vector<Scalar> path_speed;
  /// Set when the Richardson correction is within tolerance.
  bool converged = false;
  /// Richardson-extrapolated value from the last two estimates.
  Scalar value = 0;
};

/// The deformed Gateaux derivative of A at rho along delta: the eps -> 0
/// limit of (A[extend(rho + eps delta)] - A[rho]) / eps, estimated by
/// central differences on the eps schedule and Richardson extrapolation.
template <typename Scalar>
PathProbe<Scalar> directional(const Functional<Scalar>& A, const Field<Scalar>& rho,
                              const Field<Scalar>& delta, const ConstraintSpec<Scalar>& c,
                              const KTarget<Scalar>& K,
                              const DirectionalOptions<Scalar>& opts = {}) {
  using std::abs;
  rho.checked(delta);
  require_on_constraint(rho, c, K, opts.constraint_tol);
  if (opts.eps_schedule.empty())
    throw Error(ErrorKind::InvalidArgument, "empty eps schedule");
  for (std::size_t k = 0; k < opts.eps_schedule.size(); ++k) {
    const Scalar e = opts.eps_schedule[k];
    if (!(e > Scalar(0)) || (k > 0 && !(e < opts.eps_schedule[k - 1])))
      throw Error(ErrorKind::InvalidArgument,
                  "eps schedule must be positive and strictly decreasing");
  }

  auto on_path = [&](Scalar eps) {
    try {
      return deformed_path(rho, delta, eps, c, K);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DomainViolation || e.kind() == ErrorKind::RangeViolation ||
          e.kind() == ErrorKind::ZeroDenominator) {
        std::ostringstream os;
        os << "path leaves the domain at eps = " << eps << ": " << e.what();
        throw Error(ErrorKind::PathDomainViolation, os.str(), e.node());
      }
      throw;
    }
  };

  PathProbe<Scalar> probe;
  probe.eps_schedule = opts.eps_schedule;
  for (const Scalar eps : opts.eps_schedule) {
    const Field<Scalar> up = on_path(eps);
    const Field<Scalar> down = on_path(-eps);
    probe.estimates.push_back((A(up) - A(down)) / (Scalar(2) * eps));
    probe.path_speed.push_back(norm(up - rho) / eps);
  }

  const std::size_t m = probe.estimates.size();
  if (m == 1) {
    probe.value = probe.estimates[0];
    probe.converged = false;
  } else {
    const Scalar e_prev = probe.estimates[m - 2];
    const Scalar e_last = probe.estimates[m - 1];
    const Scalar r = opts.eps_schedule[m - 2] / opts.eps_schedule[m - 1];
    probe.value = e_last + (e_last - e_prev) / (r * r - Scalar(1));
    probe.converged =
        abs(e_last - probe.value) <= opts.tol * std::max(Scalar(1), abs(probe.value));
  }
  if (!probe.converged && opts.require_convergence) {
    std::ostringstream os;
    os.precision(17);
    os << "directional estimates disagree beyond tolerance " << opts.tol << ":";
    for (std::size_t k = 0; k < m; ++k)
      os << " eps=" << opts.eps_schedule[k] << " -> " << probe.estimates[k];
    throw Error(ErrorKind::NotConverged, os.str());
  }
  return probe;
}

template <typename Scalar>
struct GateauxCheck {
  PathProbe<Scalar> probe;
  /// inner(k_derivative(grad A), delta).
  Scalar predicted = 0;
  Scalar residual = 0;
};

/// Compares the deformed directional derivative with the pairing of the
/// K-conserving derivative against delta. With `project_delta` the direction
/// is first projected onto the first-order conserving subspace.
template <typename Scalar>
GateauxCheck<Scalar> gateaux_check(const Functional<Scalar>& A, const Field<Scalar>& rho,
                                   const Field<Scalar>& delta, const ConstraintSpec<Scalar>& c,
                                   const KTarget<Scalar>& K, bool project_delta = false,
                                   const DirectionalOptions<Scalar>& opts = {}) {
  using std::abs;
  const Field<Scalar> dir =
      project_delta
          ? project_change(delta, rho, c, K, WeightChoice<Scalar>::f_of_rho(), opts.constraint_tol)
          : delta;
  GateauxCheck<Scalar> out;
  out.probe = directional(A, rho, dir, c, K, opts);
  out.predicted = inner(k_derivative(gradient(A, rho), rho, c, K, opts.constraint_tol), dir);
  out.residual = abs(out.probe.value - out.predicted);
  return out;
}

template <typename Scalar>
Scalar deformed_gateaux_residual(const Functional<Scalar>& A, const Field<Scalar>& rho,
                                 const Field<Scalar>& delta, const ConstraintSpec<Scalar>& c,
                                 const KTarget<Scalar>& K, bool project_delta = false,
                                 const DirectionalOptions<Scalar>& opts = {}) {
  return gateaux_check(A, rho, delta, c, K, project_delta, opts).residual;
}

template <typename Scalar>
struct ChainRuleReport {
  /// max |fd_gradient(A o extend)(g) - chain-rule prediction|.
  Scalar residual = 0;
  /// max change of the prediction when the inner gradient is shifted by mu f'.
  Scalar mu_shift_change = 0;
};

/// Checks that the gradient of g -> A[extend(g)] equals the chain rule
/// through the extension map. The left side is the finite-difference
/// gradient of the composition; the right side is
///
///   s f'(g) / f'(rho0) * k_derivative(grad A(rho0), rho0)
///
/// with rho0 = extend(g) and s = K / K[g]. On the constraint set s = 1 and
/// the factor is one, leaving the K-conserving derivative itself. The right
/// side is recomputed with grad A + mu f'(rho0) to confirm the shift drops out.
template <typename Scalar>
ChainRuleReport<Scalar> chain_rule_check(const Functional<Scalar>& A, const Field<Scalar>& g_field,
                                         const ConstraintSpec<Scalar>& c, const KTarget<Scalar>& K,
                                         Scalar mu = Scalar(3.25)) {
  auto composed = [&A, &c, &K](const Field<Scalar>& g) { return A(extend(g, c, K)); };
  const Field<Scalar> lhs = fd_gradient(composed, g_field);

  const Field<Scalar> rho0 = extend(g_field, c, K);
  const Scalar s = K.value() / k_value(g_field, c);
  const Field<Scalar> fp0 = f_prime_values(rho0, c);
  const Field<Scalar> tangent = rho0.with_values(
      (s * f_prime_values(g_field, c).values().array() / fp0.values().array()).matrix());

  const Field<Scalar> gA = gradient(A, rho0);
  const Field<Scalar> rhs = tangent.cwiseProduct(k_derivative(gA, rho0, c, K));
  const Field<Scalar> rhs_shifted = tangent.cwiseProduct(k_derivative(gA + fp0 * mu, rho0, c, K));
  return {max_abs_diff(lhs, rhs), max_abs_diff(rhs, rhs_shifted)};
}

}  // namespace kfunc
