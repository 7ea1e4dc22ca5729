#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace kfunc;
using namespace kfunc::testing;

namespace {

/// Independent loop version of g - f' (1/K) sum w (f/f') g.
F oracle_k_derivative(const F& g, const F& rho, const C& c, double K) {
  const auto& x = rho.grid().nodes();
  const auto& w = rho.grid().weights();
  double mu = 0;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    mu += w[i] * c.f(x[i], rho[i]) / c.f_prime(x[i], rho[i]) * g[i];
  mu /= K;
  Eigen::VectorXd out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) out[i] = g[i] - c.f_prime(x[i], rho[i]) * mu;
  return rho.with_values(out);
}

}  // namespace

TEST(KDerivative, ClosedFormOnTheMidpointGrid) {
  // rho = x + 1/2, A = int rho^2, f = rho, K = 1. The continuum answer is
  // 2x - 7/6; the midpoint sum of rho^2 shifts it by exactly h^2 / 6.
  const auto g = unit_grid();
  const F rho = affine(g);
  const F d = k_derivative(gradient(square_integral<double>(), rho), rho, C::identity(), KT(1.0));
  const double h = 1.0 / 200;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const double x = g->nodes()[i];
    EXPECT_NEAR(d[i], 2 * x - 7.0 / 6 + h * h / 6, 1e-13);
    EXPECT_NEAR(d[i], 2 * x - 7.0 / 6, 1e-4);
  }
}

TEST(KDerivative, ClosedFormConvergesAtSecondOrder) {
  double prev = 0;
  for (Eigen::Index n : {100, 200, 400, 800}) {
    const auto g = unit_grid(n);
    const F rho = affine(g);
    const F d = k_derivative(gradient(square_integral<double>(), rho), rho, C::identity(), KT(1.0));
    const F exact = F::sample(g, [](double x) { return 2 * x - 7.0 / 6; });
    const double err = max_abs_diff(d, exact);
    if (prev > 0) {
      EXPECT_NEAR(prev / err, 4.0, 1e-3);
    }
    prev = err;
  }
}

TEST(KDerivative, MatchesLoopOracle) {
  FieldSampler s(2024);
  const auto g = unit_grid();
  for (const C& c : constraints(g))
    for (int k = 0; k < 5; ++k) {
      const F rho = s.positive_profile<double>(g);
      const double K = k_value(rho, c);
      const F gr = s.signed_profile<double>(g);
      EXPECT_LE(max_abs_diff(k_derivative(gr, rho, c, KT(K)), oracle_k_derivative(gr, rho, c, K)),
                1e-13)
          << c.name;
    }
}

TEST(KDerivative, AmbiguityCancelsForRandomMultipliers) {
  FieldSampler s(77);
  const auto g = unit_grid();
  for (const C& c : constraints(g))
    for (int k = 0; k < 5; ++k) {
      const F rho = s.positive_profile<double>(g);
      const KT K(k_value(rho, c));
      const F gr = s.signed_profile<double>(g);
      const F shifted = gr + f_prime_values(rho, c) * s.uniform(-10, 10);
      EXPECT_LE(max_abs_diff(k_derivative(shifted, rho, c, K), k_derivative(gr, rho, c, K)), 1e-12);
    }
}

TEST(KDerivative, OrthogonalToFOverFPrime) {
  // sum w (f/f') k_derivative = 0: the multiplier of the result vanishes.
  FieldSampler s(78);
  const auto g = unit_grid();
  for (const C& c : constraints(g)) {
    const F rho = s.positive_profile<double>(g);
    const KT K(k_value(rho, c));
    const F d = k_derivative(s.signed_profile<double>(g), rho, c, K);
    double m = 0;
    for (Eigen::Index i = 0; i < rho.size(); ++i)
      m += g->weights()[i] * c.f(g->nodes()[i], rho[i]) / c.f_prime(g->nodes()[i], rho[i]) * d[i];
    EXPECT_NEAR(m, 0.0, 1e-12) << c.name;
  }
}

TEST(KDerivative, RequiresRhoOnTheSet) {
  const auto g = unit_grid();
  const F rho = affine(g);
  try {
    k_derivative(rho, rho, C::identity(), KT(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstraintMismatch);
  }
}

TEST(UDerivative, FOfRhoEqualsKDerivative) {
  FieldSampler s(79);
  const auto g = unit_grid();
  for (const C& c : constraints(g)) {
    const F rho = s.positive_profile<double>(g);
    const KT K(k_value(rho, c));
    const F gr = s.signed_profile<double>(g);
    EXPECT_LE(max_abs_diff(u_derivative(gr, rho, c, W::f_of_rho()), k_derivative(gr, rho, c, K)),
              1e-12);
  }
}

TEST(UDerivative, PointWeightZeroesItsNode) {
  FieldSampler s(80);
  const auto g = unit_grid();
  const F rho = s.positive_profile<double>(g);
  const F gr = s.signed_profile<double>(g);
  for (Eigen::Index i0 : {0, 57, 199}) {
    const F d = u_derivative(gr, rho, C::power(2.0), W::point(i0));
    EXPECT_EQ(d[i0], 0.0);
    // Elsewhere: g_i - f'_i g_i0 / f'_i0.
    const Eigen::Index j = (i0 + 3) % 200;
    EXPECT_NEAR(d[j], gr[j] - 2 * rho[j] * gr[i0] / (2 * rho[i0]), 1e-13);
  }
  EXPECT_THROW(u_derivative(gr, rho, C::identity(), W::point(200)), Error);
  EXPECT_THROW(u_derivative(gr, rho, C::identity(), W::point(-1)), Error);
}

TEST(UDerivative, WeightsAreNormalized) {
  FieldSampler s(81);
  const auto g = unit_grid();
  const F rho = s.positive_profile<double>(g);
  for (const C& c : constraints(g))
    for (const W& w : {W::f_of_rho(), W::custom_q(s.positive_profile<double>(g)), W::point(11)})
      EXPECT_NEAR(integrate(weight_field(w, rho, c)), 1.0, 1e-13) << w.describe();
}

TEST(UDerivative, ZeroQIntegral) {
  const auto g = unit_grid(4);
  const F rho = F::constant(g, 1.0);
  const F q(g, (Eigen::VectorXd(4) << 1, -1, 1, -1).finished());
  try {
    u_derivative(rho, rho, C::identity(), W::custom_q(q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroQIntegral);
  }
}

TEST(UDerivative, ZeroFPrimeNamesTheNode) {
  const auto g = unit_grid(4);
  const C flat{"flat-at-zero",
               [](double, double r) { return r * r * r; },
               [](double, double r) { return 3 * r * r; },
               [](double, double y) { return std::cbrt(y); },
               Interval<double>::all(),
               Interval<double>::all(),
               false,
               false};
  const F rho(g, (Eigen::VectorXd(4) << 1, 2, 0, 1).finished());
  try {
    u_derivative(rho, rho, flat, W::f_of_rho());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroFPrime);
    EXPECT_EQ(*e.node(), 2u);
  }
}

TEST(ProjectChange, AnnihilatesFluxAndIsAdjoint) {
  FieldSampler s(82);
  const auto g = unit_grid();
  for (const C& c : constraints(g))
    for (int k = 0; k < 5; ++k) {
      const F rho = s.positive_profile<double>(g);
      const KT K(k_value(rho, c));
      const F delta = s.signed_profile<double>(g), gr = s.signed_profile<double>(g);
      const F fp = f_prime_values(rho, c);
      for (const W& w : {W::f_of_rho(), W::custom_q(s.positive_profile<double>(g)), W::point(5)}) {
        const F p = project_change(delta, rho, c, K, w);
        EXPECT_LE(std::abs(inner(fp, p)), 1e-12);
        EXPECT_LE(std::abs(inner(gr, p) - inner(u_derivative(gr, rho, c, w), delta)), 1e-12);
      }
    }
}

TEST(ProjectChange, LeavesConservingChangesAlone) {
  FieldSampler s(83);
  const auto g = unit_grid();
  const F rho = s.positive_profile<double>(g);
  const C c = C::identity();
  const KT K(k_value(rho, c));
  F delta = s.signed_profile<double>(g);
  delta = delta.plus_constant(-integrate(delta));
  EXPECT_LE(max_abs_diff(project_change(delta, rho, c, K, W::f_of_rho()), delta), 1e-14);
}

TEST(Homogeneity, EulerResidualVanishesForTaggedFunctionals) {
  FieldSampler s(84);
  const auto g = unit_grid();
  const F rho = s.positive_profile<double>(g);
  EXPECT_NEAR(homogeneity_residual(ratio_n<double>(), rho, C::identity(), 0.0), 0.0, 1e-12);
  EXPECT_NEAR(homogeneity_residual(ratio_k<double>(), rho, C::power(2.0), 0.0), 0.0, 1e-12);
  EXPECT_NEAR(homogeneity_residual(square_integral<double>(), rho, C::power(2.0), 1.0), 0.0, 1e-12);
  // int rho^2 under f = rho is homogeneous of degree 2: sum w rho (2 rho) = 2A.
  EXPECT_NEAR(homogeneity_residual(square_integral<double>(), rho, C::identity(), 2.0), 0.0, 1e-12);
  EXPECT_GT(std::abs(homogeneity_residual(square_integral<double>(), rho, C::identity(), 1.0)), 0.1);
}
