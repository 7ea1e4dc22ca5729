#include <gtest/gtest.h>

#include <cmath>

#include "kfunc/scenario.hpp"
#include "support.hpp"

using namespace kfunc;
using namespace kfunc::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a kfunc::Error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Constraint, BuiltinsEvaluate) {
  const C p2 = C::power(2.0);
  EXPECT_DOUBLE_EQ(p2.f(0, 3.0), 9.0);
  EXPECT_DOUBLE_EQ(p2.f_prime(0, 3.0), 6.0);
  EXPECT_DOUBLE_EQ(p2.f_inv(0, 9.0), 3.0);
  EXPECT_EQ(p2.name, "power:2");
  const C e = C::exponential();
  EXPECT_DOUBLE_EQ(e.f_inv(0, e.f(0, -0.7)), -0.7);
  const C lin = C::weighted_linear([](double x) { return 1 + x; });
  EXPECT_DOUBLE_EQ(lin.f(1.0, 3.0), 6.0);
  EXPECT_DOUBLE_EQ(lin.f_inv(1.0, 6.0), 3.0);
  EXPECT_TRUE(lin.linear);
  EXPECT_THROW(C::power(0.0), Error);
}

TEST(Constraint, KValueOfAffineProfile) {
  const auto g = unit_grid();
  const F rho = affine(g);
  EXPECT_NEAR(k_value(rho, C::identity()), 1.0, 1e-14);
  // int (x + 1/2)^2 = 13/12; the midpoint rule is low by h^2/12.
  EXPECT_NEAR(k_value(rho, C::power(2.0)), 13.0 / 12 - 1.0 / (12 * 200.0 * 200.0), 1e-14);
}

TEST(Constraint, DomainViolationNamesTheNode) {
  const auto g = unit_grid(10);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(10);
  v[7] = -1;
  try {
    k_value(F(g, v), C::power(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainViolation);
    EXPECT_EQ(*e.node(), 7u);
    EXPECT_NE(std::string(e.what()).find("node 7"), std::string::npos);
  }
}

TEST(Constraint, ZeroTargetRejected) {
  EXPECT_EQ(kind_of([] { KT(0.0); }), ErrorKind::ZeroK);
  EXPECT_EQ(kind_of([] { KT(std::numeric_limits<double>::infinity()); }), ErrorKind::ZeroK);
}

TEST(Constraint, OffSetFieldIsAMismatch) {
  const auto g = unit_grid();
  EXPECT_EQ(kind_of([&] { require_on_constraint(affine(g), C::identity(), KT(1.1)); }),
            ErrorKind::ConstraintMismatch);
  EXPECT_NO_THROW(require_on_constraint(affine(g), C::identity(), KT(1.0)));
}

TEST(Constraint, LinearWeightMustBePositive) {
  const auto g = unit_grid(8);
  const C bad = C::weighted_linear([](double x) { return x - 0.5; });
  EXPECT_EQ(kind_of([&] { k_value(F::constant(g, 1.0), bad); }), ErrorKind::DomainViolation);
}

TEST(Extend, ClosedFormForIdentity) {
  // extend(rho) = rho K / int rho for f = rho.
  const auto g = unit_grid();
  const F rho = affine(g) * 3.0;
  const F e = extend(rho, C::identity(), KT(1.0));
  for (Eigen::Index i = 0; i < rho.size(); ++i) EXPECT_NEAR(e[i], rho[i] / 3.0, 1e-15);
}

TEST(Extend, ClosedFormForPower) {
  // extend(rho) = rho sqrt(K / int rho^2) for f = rho^2.
  FieldSampler s(9);
  const auto g = unit_grid();
  const F rho = s.positive_profile<double>(g);
  const double P = loop_sum(rho.cwiseProduct(rho));
  const F e = extend(rho, C::power(2.0), KT(2.0));
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    EXPECT_NEAR(e[i], rho[i] * std::sqrt(2.0 / P), 1e-14);
}

TEST(Extend, ExactnessIdempotenceAndFiberInvariance) {
  FieldSampler s(17);
  const auto g = unit_grid();
  for (const C& c : constraints(g))
    for (int k = 0; k < 5; ++k) {
      const F rho = s.positive_profile<double>(g);
      const KT K(k_value(rho, c) * s.uniform(0.5, 2.0));
      const F once = extend(rho, c, K);
      EXPECT_NEAR(k_value(once, c), K.value(), 1e-12 * std::abs(K.value())) << c.name;
      EXPECT_LE(max_abs_diff(extend(once, c, K), once), 1e-10) << c.name;
      for (double lambda : {0.3, 1.7})
        EXPECT_LE(max_abs_diff(extend(fiber_point(rho, c, lambda), c, K), once), 1e-10) << c.name;
    }
}

TEST(Extend, IdentityOnTheConstraintSet) {
  FieldSampler s(23);
  const auto g = unit_grid();
  for (const C& c : constraints(g)) {
    const F rho = s.positive_profile<double>(g);
    EXPECT_LE(max_abs_diff(extend(rho, c, KT(k_value(rho, c))), rho), 1e-13) << c.name;
  }
}

TEST(Extend, RangeAndZeroDenominatorErrors) {
  const auto g = unit_grid(4);
  // K[rho] = 0 for a zero-mean field under f = rho.
  const F zero_mean(g, (Eigen::VectorXd(4) << 1, -1, 2, -2).finished());
  EXPECT_EQ(kind_of([&] { extend(zero_mean, C::identity(), KT(1.0)); }), ErrorKind::ZeroDenominator);
  // A negative target pushes f = rho^2 outside its positive range.
  try {
    extend(F::constant(g, 1.0), C::power(2.0), KT(-1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RangeViolation);
    EXPECT_EQ(*e.node(), 0u);
  }
}

TEST(Extend, DeformedPathStaysOnTheSet) {
  FieldSampler s(31);
  const auto g = unit_grid();
  for (const C& c : constraints(g)) {
    const F rho = s.positive_profile<double>(g);
    const KT K(k_value(rho, c));
    const F delta = s.signed_profile<double>(g) * 0.1;
    for (double eps : {-1.0, -0.01, 0.0, 0.5, 1.0})
      EXPECT_NEAR(k_value(deformed_path(rho, delta, eps, c, K), c), K.value(),
                  1e-12 * std::abs(K.value()))
          << c.name;
  }
}

TEST(Invertibility, BuiltinsPassAndEvenSquareFails) {
  const auto g = unit_grid();
  const F probe = invertibility_probe(g);
  for (const C& c : constraints(g)) {
    const auto rep = check_invertibility(c, probe);
    EXPECT_TRUE(rep.monotone) << c.name;
    EXPECT_LE(rep.max_roundtrip_error, 1e-12) << c.name;
  }
  const auto rep = check_invertibility(even_square_constraint(), probe);
  EXPECT_FALSE(rep.monotone);
  EXPECT_GT(rep.max_roundtrip_error, 1.0);
}
