#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace kfunc;
using namespace kfunc::testing;

TEST(Flow, SquareIntegralReachesTheUniformMinimizer) {
  // Minimizer of int rho^2 subject to int rho = 1 on [0, 1) is rho = 1 with
  // g = 2 rho = mu f', so mu = 2.
  const auto g = unit_grid();
  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = minimize(square_integral<double>(), affine(g), C::identity(), KT(1.0));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(trace.status, FlowStatus::Converged);
  EXPECT_LE(max_abs(trace.final_field.plus_constant(-1.0)), 1e-6);
  EXPECT_NEAR(trace.final_multiplier, 2.0, 1e-6);
  EXPECT_LT(seconds, 1.0);
  for (const auto& r : trace.records) EXPECT_NEAR(r.k_value, 1.0, 1e-10);
  for (std::size_t i = 1; i < trace.records.size(); ++i)
    EXPECT_LE(trace.records[i].energy, trace.records[i - 1].energy);
}

TEST(Flow, StartingAtTheMinimizer) {
  const auto g = unit_grid();
  const auto trace = minimize(square_integral<double>(), F::constant(g, 1.0), C::identity(), KT(1.0));
  EXPECT_EQ(trace.status, FlowStatus::Converged);
  EXPECT_EQ(trace.records.size(), 1u);
  EXPECT_NEAR(trace.final_multiplier, 2.0, 1e-12);
}

TEST(Flow, LinearFunctionalDoesNotConverge) {
  // int v rho under int rho = 1 is unbounded below.
  const auto g = unit_grid();
  const Fn A = linear_integral<double>([](double x) { return std::sin(2 * std::numbers::pi * x); });
  FlowOptions<double> opts;
  opts.max_iters = 2000;
  const auto trace = minimize(A, affine(g), C::identity(), KT(1.0), opts);
  EXPECT_NE(trace.status, FlowStatus::Converged);
}

TEST(Flow, PowerConstraintMultiplier) {
  // Minimizing int rho subject to int rho^2 = K: g = 1 = mu 2 rho at rho = const,
  // so rho = sqrt(K) and mu = 1 / (2 sqrt(K)).
  const auto g = unit_grid(50);
  const C c = C::power(2.0);
  const KT K(4.0);
  const Fn A = local_integral<double>(
      "neg_linear", [](double, double r) { return -r; }, [](double, double) { return -1.0; });
  const F rho0 = extend(affine(g), c, K);
  const auto trace = minimize(A, rho0, c, K);
  ASSERT_EQ(trace.status, FlowStatus::Converged);
  EXPECT_LE(max_abs(trace.final_field.plus_constant(-2.0)), 1e-6);
  EXPECT_NEAR(trace.final_multiplier, -0.25, 1e-6);
}

TEST(Flow, ExtendInitialPlacesRhoOnTheSet) {
  const auto g = unit_grid();
  FlowOptions<double> opts;
  opts.extend_initial = true;
  const auto trace = minimize(square_integral<double>(), affine(g) * 3.0, C::identity(), KT(1.0), opts);
  EXPECT_EQ(trace.status, FlowStatus::Converged);
  EXPECT_NEAR(trace.records.front().k_value, 1.0, 1e-12);
  EXPECT_THROW(minimize(square_integral<double>(), affine(g) * 3.0, C::identity(), KT(1.0)), Error);
}

TEST(Flow, StepRejectsNonPositiveEta) {
  const auto g = unit_grid();
  EXPECT_THROW(flow_step(affine(g), square_integral<double>(), C::identity(), KT(1.0), 0.0), Error);
  const F next = flow_step(affine(g), square_integral<double>(), C::identity(), KT(1.0), 0.1);
  EXPECT_NEAR(integrate(next), 1.0, 1e-14);
  EXPECT_LT(square_integral<double>()(next), square_integral<double>()(affine(g)));
}

TEST(Flow, MultiplierAtStationarity) {
  const auto g = unit_grid();
  const F rho = F::constant(g, 1.0);
  EXPECT_NEAR(multiplier(gradient(square_integral<double>(), rho), rho, C::identity(), KT(1.0)), 2.0,
              1e-14);
}

TEST(Flow, MaxItersIsReported) {
  const auto g = unit_grid();
  FlowOptions<double> opts;
  opts.max_iters = 3;
  const auto trace = minimize(square_integral<double>(), affine(g), C::identity(), KT(1.0), opts);
  EXPECT_EQ(trace.status, FlowStatus::MaxIters);
  EXPECT_EQ(trace.records.size(), 4u);
  EXPECT_EQ(trace.records.front().eta, 0.0);
}
