#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "kfunc/constraint.hpp"
#include "kfunc/functionals.hpp"
#include "kfunc/kderiv.hpp"

namespace kfunc {

/// mu = (1/K) sum_j w_j (f_j / f'_j) g_j. At a constrained stationary
/// point g = mu f'(rho).
template <typename Scalar>
Scalar multiplier(const Field<Scalar>& g, const Field<Scalar>& rho, const ConstraintSpec<Scalar>& c,
                  const KTarget<Scalar>& K) {
  rho.checked(g);
  return detail::k_average(g, f_values(rho, c), f_prime_values(rho, c), K.value());
}

/// One descent step along -k_derivative followed by the exact retraction
/// onto the constraint set.
template <typename Scalar>
Field<Scalar> flow_step(const Field<Scalar>& rho, const Functional<Scalar>& A,
                        const ConstraintSpec<Scalar>& c, const KTarget<Scalar>& K, Scalar eta,
                        Scalar tol = Scalar(kConstraintTol)) {
  if (!(eta > Scalar(0))) throw Error(ErrorKind::InvalidArgument, "step size must be positive");
  const Field<Scalar> d = k_derivative(gradient(A, rho), rho, c, K, tol);
  return extend(rho - d * eta, c, K);
}

namespace detail {

/// Shorter steps tried after a noise-level rise before accepting it.
inline constexpr int kNoiseRetries = 8;

/// Rounding allowance for comparing two energy evaluations.
template <typename Scalar>
Scalar energy_noise(Scalar a, Scalar b) {
  using std::abs;
  return Scalar(16) * std::numeric_limits<Scalar>::epsilon() * std::max(abs(a), abs(b));
}

}  // namespace detail

enum class FlowStatus { Converged, MaxIters, StepUnderflow };

inline std::string_view to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "Converged";
    case FlowStatus::MaxIters: return "MaxIters";
    case FlowStatus::StepUnderflow: return "StepUnderflow";
  }
  return "Unknown";
}

template <typename Scalar>
struct FlowOptions {
  Scalar eta0 = Scalar(0.1);
  Scalar shrink = Scalar(2);
  Scalar grow = Scalar(1.5);
  /// Stop when max |k_derivative| <= tol.
  Scalar tol = Scalar(1e-8);
  std::size_t max_iters = 10000;
  Scalar eta_min = Scalar(1e-14);
  /// Apply extend to rho0 before iterating instead of requiring it on the set.
  bool extend_initial = false;
  Scalar constraint_tol = Scalar(kConstraintTol);
};

template <typename Scalar>
struct FlowRecord {
  std::size_t iteration;
  Scalar energy;
  Scalar k_value;
  Scalar residual;
  /// Step that produced this iterate; zero for the initial row.
  Scalar eta;
};

template <typename Scalar>
struct FlowTrace {
  std::vector<FlowRecord<Scalar>> records;
  FlowStatus status = FlowStatus::MaxIters;
  Field<Scalar> final_field;
  Scalar final_multiplier = 0;
};

/// Constrained descent with backtracking. A trial step is accepted when it
/// stays in the domain and does not raise the energy; otherwise eta is
/// divided by `shrink`. Near a minimum the energy change drops below the
/// rounding of A, so a trial whose energy rises by no more than a few ulps
/// is kept as a fallback if it strictly lowers the residual; a few shorter
/// steps are tried first in search of a strict decrease. After an accepted
/// step eta grows by `grow`, capped at eta0. Records hold the initial state
/// and every accepted iterate.
template <typename Scalar>
FlowTrace<Scalar> minimize(const Functional<Scalar>& A, const Field<Scalar>& rho0,
                           const ConstraintSpec<Scalar>& c, const KTarget<Scalar>& K,
                           const FlowOptions<Scalar>& opts = {}) {
  Field<Scalar> rho = opts.extend_initial ? extend(rho0, c, K) : rho0;
  require_on_constraint(rho, c, K, opts.constraint_tol);

  Scalar energy = A(rho);
  Field<Scalar> g = gradient(A, rho);
  Field<Scalar> d = k_derivative(g, rho, c, K, opts.constraint_tol);
  Scalar residual = max_abs(d);
  Scalar eta = opts.eta0;

  FlowTrace<Scalar> trace{{}, FlowStatus::MaxIters, rho, Scalar(0)};
  trace.records.push_back({0, energy, k_value(rho, c), residual, Scalar(0)});

  std::size_t iter = 0;
  while (true) {
    if (residual <= opts.tol) {
      trace.status = FlowStatus::Converged;
      break;
    }
    if (iter >= opts.max_iters) {
      trace.status = FlowStatus::MaxIters;
      break;
    }
    std::optional<Field<Scalar>> accepted;
    Scalar accepted_energy = energy;
    std::optional<Field<Scalar>> accepted_g;
    // Noise-level candidate, used only if a few shorter steps find no strict decrease.
    std::optional<Field<Scalar>> fallback, fallback_g;
    Scalar fallback_energy = energy, fallback_eta = eta;
    int extra_tries = 0;
    while (eta >= opts.eta_min) {
      try {
        Field<Scalar> trial = extend(rho - d * eta, c, K);
        const Scalar e = A(trial);
        if (e <= energy) {
          accepted = std::move(trial);
          accepted_energy = e;
          break;
        }
        if (!fallback && e - energy <= detail::energy_noise(energy, e)) {
          Field<Scalar> tg = gradient(A, trial);
          if (max_abs(k_derivative(tg, trial, c, K, opts.constraint_tol)) < residual) {
            fallback = std::move(trial);
            fallback_energy = e;
            fallback_g = std::move(tg);
            fallback_eta = eta;
          }
        }
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::DomainViolation && err.kind() != ErrorKind::RangeViolation &&
            err.kind() != ErrorKind::ZeroDenominator)
          throw;
      }
      if (fallback && ++extra_tries > detail::kNoiseRetries) break;
      eta /= opts.shrink;
    }
    if (!accepted && fallback) {
      accepted = std::move(fallback);
      accepted_energy = fallback_energy;
      accepted_g = std::move(fallback_g);
      eta = fallback_eta;
    }
    if (!accepted) {
      trace.status = FlowStatus::StepUnderflow;
      break;
    }
    ++iter;
    rho = std::move(*accepted);
    energy = accepted_energy;
    g = accepted_g ? std::move(*accepted_g) : gradient(A, rho);
    d = k_derivative(g, rho, c, K, opts.constraint_tol);
    residual = max_abs(d);
    trace.records.push_back({iter, energy, k_value(rho, c), residual, eta});
    eta = std::min(eta * opts.grow, opts.eta0);
  }
  trace.final_field = rho;
  trace.final_multiplier = multiplier(g, rho, c, K);
  return trace;
}

}  // namespace kfunc
