#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "kfunc/constraint.hpp"
#include "kfunc/grid.hpp"

namespace kfunc {

/// Tags a functional as K-homogeneous of the given degree for the named
/// constraint:  A[f^-1(lambda f(rho))] = lambda^degree A[rho].
template <typename Scalar>
struct HomogeneityMeta {
  std::string constraint;
  Scalar degree;
};

template <typename Scalar>
struct Functional {
  using ValueFn = std::function<Scalar(const Field<Scalar>&)>;
  using GradientFn = std::function<Field<Scalar>(const Field<Scalar>&)>;

  std::string label;
  ValueFn value;
  std::optional<GradientFn> analytic_gradient;
  std::optional<HomogeneityMeta<Scalar>> homogeneity;

  Scalar operator()(const Field<Scalar>& rho) const { return value(rho); }
  bool has_analytic_gradient() const { return analytic_gradient.has_value(); }
};

template <typename Scalar>
Field<Scalar> fd_gradient(const Functional<Scalar>& A, const Field<Scalar>& rho) {
  return fd_gradient(A.value, rho);
}

/// The analytic gradient when one is attached, the finite-difference
/// oracle otherwise.
template <typename Scalar>
Field<Scalar> gradient(const Functional<Scalar>& A, const Field<Scalar>& rho) {
  return A.analytic_gradient ? (*A.analytic_gradient)(rho) : fd_gradient(A, rho);
}

/// sum_i w_i a(x_i, rho_i) with gradient da/drho(x_i, rho_i). An optional
/// domain is checked node-wise before evaluation.
template <typename Scalar>
Functional<Scalar> local_integral(std::string label, std::function<Scalar(Scalar, Scalar)> a,
                                  std::function<Scalar(Scalar, Scalar)> da_drho,
                                  std::optional<Interval<Scalar>> domain = std::nullopt) {
  auto check = [domain, label](const Field<Scalar>& rho) {
    if (!domain) return;
    for (Eigen::Index i = 0; i < rho.size(); ++i)
      if (!domain->contains(rho[i]))
        throw Error(ErrorKind::DomainViolation,
                    label + " needs rho in " + domain->describe(),
                    static_cast<std::size_t>(i));
  };
  Functional<Scalar> A;
  A.label = label;
  A.value = [a, check](const Field<Scalar>& rho) {
    check(rho);
    const auto& x = rho.grid().nodes();
    const auto& w = rho.grid().weights();
    // Extended accumulation keeps the rounded value monotone in the exact
    // sum, so energy comparisons near a minimum are not decided by noise.
    using Acc = std::conditional_t<std::is_same_v<Scalar, double>, long double, Scalar>;
    Acc s = 0;
    for (Eigen::Index i = 0; i < rho.size(); ++i) s += Acc(w[i]) * Acc(a(x[i], rho[i]));
    return Scalar(s);
  };
  A.analytic_gradient = [da_drho, check](const Field<Scalar>& rho) {
    check(rho);
    const auto& x = rho.grid().nodes();
    typename Field<Scalar>::Vector g(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i) g[i] = da_drho(x[i], rho[i]);
    return rho.with_values(std::move(g));
  };
  return A;
}

/// Integral of rho^2. Tagged as degree-one homogeneous for f = rho^2,
/// where it coincides with K[rho].
template <typename Scalar>
Functional<Scalar> square_integral() {
  auto A = local_integral<Scalar>(
      "square", [](Scalar, Scalar r) { return r * r; },
      [](Scalar, Scalar r) { return Scalar(2) * r; });
  A.homogeneity = HomogeneityMeta<Scalar>{"power:2", Scalar(1)};
  return A;
}

template <typename Scalar>
Functional<Scalar> cube_integral() {
  return local_integral<Scalar>(
      "cube", [](Scalar, Scalar r) { return r * r * r; },
      [](Scalar, Scalar r) { return Scalar(3) * r * r; });
}

/// Integral of v(x) rho.
template <typename Scalar>
Functional<Scalar> linear_integral(std::function<Scalar(Scalar)> v, std::string label = "linear") {
  return local_integral<Scalar>(
      std::move(label), [v](Scalar x, Scalar r) { return v(x) * r; },
      [v](Scalar x, Scalar) { return v(x); });
}

/// Integral of rho ln rho on rho > 0.
template <typename Scalar>
Functional<Scalar> entropy_integral() {
  return local_integral<Scalar>(
      "entropy", [](Scalar, Scalar r) { return r * std::log(r); },
      [](Scalar, Scalar r) { return std::log(r) + Scalar(1); }, Interval<Scalar>::positive());
}

/// sum_i w_i ((rho_{i+1} - rho_i) / h)^2 with cyclic indexing. The gradient is
/// the exact derivative of the discrete sum, -2 (rho_{i+1} - 2 rho_i + rho_{i-1}) / h^2.
template <typename Scalar>
Functional<Scalar> gradient_square() {
  auto require_periodic = [](const Field<Scalar>& rho) {
    if (!rho.grid().is_periodic())
      throw Error(ErrorKind::InvalidArgument, "gradient_square needs a periodic grid");
  };
  Functional<Scalar> A;
  A.label = "gradient_square";
  A.value = [require_periodic](const Field<Scalar>& rho) {
    require_periodic(rho);
    const auto n = rho.size();
    const Scalar h = rho.grid().spacing();
    const auto& w = rho.grid().weights();
    Scalar s = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = (rho[(i + 1) % n] - rho[i]) / h;
      s += w[i] * d * d;
    }
    return s;
  };
  A.analytic_gradient = [require_periodic](const Field<Scalar>& rho) {
    require_periodic(rho);
    const auto n = rho.size();
    const Scalar h = rho.grid().spacing();
    typename Field<Scalar>::Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i)
      g[i] = Scalar(-2) * (rho[(i + 1) % n] - Scalar(2) * rho[i] + rho[(i + n - 1) % n]) / (h * h);
    return rho.with_values(std::move(g));
  };
  return A;
}

/// Pointwise sum of two functionals. The gradient is analytic only when
/// both parts carry one.
template <typename Scalar>
Functional<Scalar> sum(const Functional<Scalar>& a, const Functional<Scalar>& b) {
  Functional<Scalar> A;
  A.label = a.label + "+" + b.label;
  A.value = [av = a.value, bv = b.value](const Field<Scalar>& rho) { return av(rho) + bv(rho); };
  if (a.analytic_gradient && b.analytic_gradient)
    A.analytic_gradient = [ag = *a.analytic_gradient, bg = *b.analytic_gradient](
                              const Field<Scalar>& rho) { return ag(rho) + bg(rho); };
  return A;
}

/// int rho^2 / (int rho)^2: unchanged by rho -> lambda rho.
template <typename Scalar>
Functional<Scalar> ratio_n() {
  Functional<Scalar> A;
  A.label = "ratio_n";
  A.value = [](const Field<Scalar>& rho) {
    const Scalar n = integrate(rho);
    return inner(rho, rho) / (n * n);
  };
  A.analytic_gradient = [](const Field<Scalar>& rho) {
    const Scalar n = integrate(rho);
    const Scalar p = inner(rho, rho);
    return (rho * (Scalar(2) / (n * n))).plus_constant(Scalar(-2) * p / (n * n * n));
  };
  A.homogeneity = HomogeneityMeta<Scalar>{"identity", Scalar(0)};
  return A;
}

/// int rho^4 / (int rho^2)^2: unchanged by rho -> sqrt(lambda) rho.
template <typename Scalar>
Functional<Scalar> ratio_k() {
  Functional<Scalar> A;
  A.label = "ratio_k";
  A.value = [](const Field<Scalar>& rho) {
    const Field<Scalar> sq = rho.cwiseProduct(rho);
    const Scalar p = integrate(sq);
    return inner(sq, sq) / (p * p);
  };
  A.analytic_gradient = [](const Field<Scalar>& rho) {
    const Field<Scalar> sq = rho.cwiseProduct(rho);
    const Scalar p = integrate(sq);
    const Scalar q = inner(sq, sq);
    const Field<Scalar> cube = sq.cwiseProduct(rho);
    return cube * (Scalar(4) / (p * p)) - rho * (Scalar(4) * q / (p * p * p));
  };
  A.homogeneity = HomogeneityMeta<Scalar>{"power:2", Scalar(0)};
  return A;
}

/// b(K[rho]); its gradient b'(K[rho]) f'(rho) is a pure multiple of f'.
template <typename Scalar>
Functional<Scalar> of_k(std::function<Scalar(Scalar)> b, std::function<Scalar(Scalar)> b_prime,
                        ConstraintSpec<Scalar> c, std::string label = "of_k") {
  Functional<Scalar> A;
  A.label = std::move(label);
  A.value = [b, c](const Field<Scalar>& rho) { return b(k_value(rho, c)); };
  A.analytic_gradient = [b_prime, c](const Field<Scalar>& rho) {
    return f_prime_values(rho, c) * b_prime(k_value(rho, c));
  };
  return A;
}

/// A[extend(rho)]: the K-independent functional agreeing with A on the
/// constraint set. Its gradient is left to the finite-difference oracle.
template <typename Scalar>
Functional<Scalar> zero_hom_extension(const Functional<Scalar>& a, ConstraintSpec<Scalar> c,
                                      KTarget<Scalar> K) {
  Functional<Scalar> A;
  A.label = "ext(" + a.label + ")";
  A.value = [av = a.value, c, K](const Field<Scalar>& rho) { return av(extend(rho, c, K)); };
  A.homogeneity = HomogeneityMeta<Scalar>{c.name, Scalar(0)};
  return A;
}

/// Built-in b(K) choices for of_k.
template <typename Scalar>
Functional<Scalar> of_k_named(const std::string& b, const ConstraintSpec<Scalar>& c) {
  if (b == "id")
    return of_k<Scalar>([](Scalar k) { return k; }, [](Scalar) { return Scalar(1); }, c, "b=K");
  if (b == "square")
    return of_k<Scalar>([](Scalar k) { return k * k; }, [](Scalar k) { return Scalar(2) * k; }, c,
                        "b=K^2");
  if (b == "cube")
    return of_k<Scalar>([](Scalar k) { return k * k * k; },
                        [](Scalar k) { return Scalar(3) * k * k; }, c, "b=K^3");
  if (b == "sin")
    return of_k<Scalar>([](Scalar k) { return std::sin(k); }, [](Scalar k) { return std::cos(k); },
                        c, "b=sin K");
  throw Error(ErrorKind::InvalidArgument, "unknown b(K) '" + b + "' (id|square|cube|sin)");
}

/// The functionals exercised by the identity suite. All are defined for
/// positive fields on a periodic grid.
template <typename Scalar>
std::vector<Functional<Scalar>> catalog() {
  const auto sine = [](Scalar x) { return std::sin(Scalar(2) * std::numbers::pi_v<Scalar> * x); };
  return {square_integral<Scalar>(), cube_integral<Scalar>(),
          linear_integral<Scalar>(sine), entropy_integral<Scalar>(),
          gradient_square<Scalar>(),     sum(gradient_square<Scalar>(), square_integral<Scalar>()),
          ratio_n<Scalar>(),             ratio_k<Scalar>()};
}

}  // namespace kfunc
