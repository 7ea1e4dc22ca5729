#include "kfunc/verify_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "kfunc/kfunc.hpp"
#include "kfunc/random_fields.hpp"

namespace kfunc::suite {

namespace {

using F = Field<double>;
using C = ConstraintSpec<double>;
using KT = KTarget<double>;
using Fn = Functional<double>;
using W = WeightChoice<double>;

constexpr double kPi = std::numbers::pi;

struct OnSet {
  F rho;
  KT K;
};

OnSet draw_on_set(FieldSampler& s, const GridPtr<double>& grid, const C& c) {
  F rho = s.positive_profile<double>(grid);
  const double K = k_value(rho, c);
  return {std::move(rho), KT(K)};
}

std::vector<W> weight_choices(FieldSampler& s, const F& rho) {
  return {W::f_of_rho(), W::custom_q(s.positive_profile<double>(rho.grid_ptr())),
          W::point(static_cast<Eigen::Index>(s.next_index(static_cast<std::uint64_t>(rho.size()))))};
}

/// A signed direction whose amplitude stays below half the smallest value
/// of rho, so rho + eps delta stays positive for |eps| <= 1.
F bounded_direction(FieldSampler& s, const F& rho) {
  F d = s.signed_profile<double>(rho.grid_ptr());
  const double scale = 0.5 * rho.values().minCoeff() / std::max(max_abs(d), 1e-300);
  return d * scale;
}

double rel(double err, double ref) { return err / std::max(1.0, std::abs(ref)); }

/// (functional, constraint, degree) triples with a known K-homogeneity.
std::vector<std::tuple<Fn, C, double>> homogeneous_pairs(const std::vector<C>& constraints) {
  std::vector<std::tuple<Fn, C, double>> out;
  for (const Fn& A : {square_integral<double>(), ratio_n<double>(), ratio_k<double>()})
    for (const C& c : constraints)
      if (A.homogeneity && A.homogeneity->constraint == c.name)
        out.emplace_back(A, c, A.homogeneity->degree);
  return out;
}

template <typename Body>
double over_constraints(const Context& ctx, std::uint64_t seed, Body&& body) {
  FieldSampler s(seed);
  double worst = 0;
  for (const C& c : builtin_constraints(ctx.grid))
    for (int k = 0; k < ctx.draws; ++k) worst = std::max(worst, body(s, c));
  return worst;
}

std::vector<IdentityCase> build_cases() {
  std::vector<IdentityCase> cases;
  auto add = [&cases](std::string id, std::string description, double tol, Metric metric,
                      std::function<double(const Context&, std::uint64_t)> fn) {
    cases.push_back({std::move(id), std::move(description), tol, metric, std::move(fn)});
  };

  add("ambiguity-cancellation",
      "k_derivative(g + mu f') = k_derivative(g), mu in [-10, 10]", 1e-12, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const F g = s.signed_profile<double>(ctx.grid);
          const double mu = s.uniform(-10, 10);
          const F shifted = g + f_prime_values(rho, c) * mu;
          return max_abs_diff(k_derivative(shifted, rho, c, K), k_derivative(g, rho, c, K));
        });
      });

  add("restricted-ambiguity",
      "u_derivative(g + mu f') = u_derivative(g) for every weight choice", 1e-12, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const F g = s.signed_profile<double>(ctx.grid);
          const F shifted = g + f_prime_values(rho, c) * s.uniform(-10, 10);
          double worst = 0;
          for (const W& w : weight_choices(s, rho))
            worst = std::max(worst, max_abs_diff(u_derivative(shifted, rho, c, w),
                                                 u_derivative(g, rho, c, w)));
          return worst;
        });
      });

  add("projection-annihilation", "sum w f' P(delta) = 0 for every weight choice", 1e-12,
      Metric::Absolute, [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const F delta = s.signed_profile<double>(ctx.grid);
          const F fp = f_prime_values(rho, c);
          double worst = 0;
          for (const W& w : weight_choices(s, rho))
            worst = std::max(worst, std::abs(inner(fp, project_change(delta, rho, c, K, w))));
          return worst;
        });
      });

  add("projection-idempotence", "P(P(delta)) = P(delta)", 1e-12, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const F delta = s.signed_profile<double>(ctx.grid);
          double worst = 0;
          for (const W& w : weight_choices(s, rho)) {
            const F once = project_change(delta, rho, c, K, w);
            worst = std::max(worst, max_abs_diff(project_change(once, rho, c, K, w), once));
          }
          return worst;
        });
      });

  add("weight-normalization", "sum w u = 1 for every weight choice", 1e-12, Metric::Absolute,
      [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          double worst = 0;
          for (const W& w : weight_choices(s, rho))
            worst = std::max(worst, std::abs(integrate(weight_field(w, rho, c)) - 1.0));
          return worst;
        });
      });

  add("projection-adjoint", "inner(g, P delta) = inner(u_derivative(g), delta)", 1e-12,
      Metric::Absolute, [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const F g = s.signed_profile<double>(ctx.grid);
          const F delta = s.signed_profile<double>(ctx.grid);
          double worst = 0;
          for (const W& w : weight_choices(s, rho))
            worst = std::max(worst, std::abs(inner(g, project_change(delta, rho, c, K, w)) -
                                             inner(u_derivative(g, rho, c, w), delta)));
          return worst;
        });
      });

  add("equal-on-constraint-set",
      "A and A + b(K[rho]) have equal constrained derivatives, all weights", 1e-10,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const C& c : builtin_constraints(ctx.grid)) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const auto weights = weight_choices(s, rho);
          for (const Fn& A : catalog<double>())
            for (const char* b : {"square", "sin"}) {
              const Fn B = sum(A, of_k_named<double>(b, c));
              const F gA = gradient(A, rho);
              const F gB = gradient(B, rho);
              for (const W& w : weights)
                worst = std::max(worst, max_abs_diff(u_derivative(gB, rho, c, w),
                                                     u_derivative(gA, rho, c, w)));
            }
        }
        return worst;
      });

  add("constraint-functional-annihilation", "k_derivative(grad b(K[rho])) = 0, b in {K, K^2, sin K}",
      1e-10, Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          double worst = 0;
          for (const char* b : {"id", "square", "sin"}) {
            const Fn B = of_k_named<double>(b, c);
            worst = std::max(worst, max_abs(k_derivative(gradient(B, rho), rho, c, K)));
          }
          return worst;
        });
      });

  add("scale-invariant-unconstrained",
      "scale-invariant A under f = rho: number-conserving derivative equals gradient", 1e-6,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        const C c = C::identity();
        double worst = 0;
        for (int k = 0; k < ctx.draws; ++k) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          const F g = gradient(ratio_n<double>(), rho);
          worst = std::max(worst, max_abs_diff(k_derivative(g, rho, c, K), g));
        }
        return worst;
      });

  add("k-homogeneity", "A[f^-1(lambda f(rho))] = lambda^m A[rho], lambda in {0.5, 1, 2}", 1e-10,
      Metric::Relative, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        const auto constraints = builtin_constraints(ctx.grid);
        auto pairs = homogeneous_pairs(constraints);
        for (const C& c : constraints)
          pairs.emplace_back(zero_hom_extension(cube_integral<double>(), c, KT(1.5)), c, 0.0);
        double worst = 0;
        for (const auto& [A, c, m] : pairs)
          for (int k = 0; k < ctx.draws; ++k) {
            const F rho = s.positive_profile<double>(ctx.grid);
            const double a0 = A(rho);
            for (double lambda : {0.5, 1.0, 2.0})
              worst = std::max(worst, rel(std::abs(A(fiber_point(rho, c, lambda)) -
                                                   std::pow(lambda, m) * a0),
                                          a0));
          }
        return worst;
      });

  add("homogeneity-euler-identity", "sum w (f/f') grad A = m A for K-homogeneous A", 1e-6,
      Metric::Absolute, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        const auto constraints = builtin_constraints(ctx.grid);
        auto pairs = homogeneous_pairs(constraints);
        for (const C& c : constraints)
          pairs.emplace_back(zero_hom_extension(cube_integral<double>(), c, KT(1.5)), c, 0.0);
        double worst = 0;
        for (const auto& [A, c, m] : pairs)
          for (int k = 0; k < 2; ++k) {
            const F rho = s.positive_profile<double>(ctx.grid);
            worst = std::max(worst, std::abs(homogeneity_residual(A, rho, c, m)));
          }
        return worst;
      });

  add("k-independent-unconstrained",
      "degree-zero K-homogeneous A: K-conserving derivative equals gradient", 1e-6,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        const auto constraints = builtin_constraints(ctx.grid);
        std::vector<std::pair<Fn, C>> pairs;
        for (const auto& [A, c, m] : homogeneous_pairs(constraints))
          if (m == 0.0) pairs.emplace_back(A, c);
        for (const C& c : constraints) {
          const F probe = s.positive_profile<double>(ctx.grid);
          pairs.emplace_back(zero_hom_extension(entropy_integral<double>(), c, KT(k_value(probe, c))),
                             c);
        }
        for (const auto& [A, c] : pairs)
          for (int k = 0; k < 2; ++k) {
            auto [rho, K] = draw_on_set(s, ctx.grid, c);
            const F g = gradient(A, rho);
            worst = std::max(worst, max_abs_diff(k_derivative(g, rho, c, K), g));
          }
        return worst;
      });

  add("extension-gradient",
      "gradient of A[extend(g)] matches the chain rule through the extension", 1e-5,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const C& c : builtin_constraints(ctx.grid))
          for (const Fn& A : catalog<double>()) {
            auto [rho, K] = draw_on_set(s, ctx.grid, c);
            worst = std::max(worst, chain_rule_check(A, rho, c, K).residual);
            worst = std::max(worst, chain_rule_check(A, rho * 1.1, c, K).residual);
          }
        return worst;
      });

  add("chain-rule-multiplier-shift",
      "chain-rule prediction unchanged by grad A -> grad A + mu f'", 1e-12, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const C& c : builtin_constraints(ctx.grid))
          for (const Fn& A : catalog<double>()) {
            auto [rho, K] = draw_on_set(s, ctx.grid, c);
            worst = std::max(worst,
                             chain_rule_check(A, rho, c, K, s.uniform(-10, 10)).mu_shift_change);
          }
        return worst;
      });

  add("extension-idempotence", "extend(extend(rho)) = extend(rho)", 1e-10, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const KT K(k_value(rho, c) * s.uniform(0.5, 2.0));
          const F once = extend(rho, c, K);
          return max_abs_diff(extend(once, c, K), once);
        });
      });

  add("extension-fiber-invariance", "extend(f^-1(lambda f(rho))) = extend(rho), lambda in {0.5, 2}",
      1e-10, Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const KT K(k_value(rho, c) * s.uniform(0.5, 2.0));
          const F base = extend(rho, c, K);
          double worst = 0;
          for (double lambda : {0.5, 2.0})
            worst = std::max(worst, max_abs_diff(extend(fiber_point(rho, c, lambda), c, K), base));
          return worst;
        });
      });

  add("extension-exactness", "K[extend(rho)] = K and K[extend(rho + eps delta)] = K, eps in [-1, 1]",
      1e-12, Metric::Relative, [](const Context& ctx, std::uint64_t seed) {
        return over_constraints(ctx, seed, [&](FieldSampler& s, const C& c) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const KT K(k_value(rho, c) * s.uniform(0.5, 2.0));
          double worst = rel(std::abs(k_value(extend(rho, c, K), c) - K.value()), K.value());
          const F delta = bounded_direction(s, rho);
          for (int k = 0; k < 4; ++k) {
            const double eps = s.uniform(-1, 1);
            const F path = deformed_path(rho, delta, eps, c, K);
            worst = std::max(worst, rel(std::abs(k_value(path, c) - K.value()), K.value()));
          }
          return worst;
        });
      });

  add("shape-reconstruction", "n_part + shape_part = g", 1e-12, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (int k = 0; k < ctx.draws; ++k) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const F g = s.signed_profile<double>(ctx.grid);
          const auto split = shape_split(g, rho);
          worst = std::max(worst, max_abs_diff(split.n_part.plus_constant(split.shape_part), g));
        }
        return worst;
      });

  add("shape-conserving-average",
      "shape_part = inner(rho, g)/N and n_part = number-conserving derivative", 1e-12,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (int k = 0; k < ctx.draws; ++k) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const F g = s.signed_profile<double>(ctx.grid);
          const auto split = shape_split(g, rho);
          const double N = integrate(rho);
          worst = std::max(worst, std::abs(split.shape_part - inner(rho, g) / N));
          worst = std::max(worst, max_abs_diff(split.n_part,
                                               k_derivative(g, rho, C::identity(), KT(N))));
        }
        return worst;
      });

  add("number-shape-sum",
      "grad A = number-conserving derivative + d A[N n]/dN (finite difference in N)", 1e-6,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const Fn& A : catalog<double>()) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const double N = integrate(rho);
          const F n = rho * (1.0 / N);
          const double h = 1e-4 * N;
          const double dA_dN = (A(n * (N + h)) - A(n * (N - h))) / (2 * h);
          const F g = gradient(A, rho);
          const F number_part = k_derivative(g, rho, C::identity(), KT(N));
          worst = std::max(worst, max_abs_diff(number_part.plus_constant(dA_dN), g));
        }
        return worst;
      });

  add("shape-functional-crosscheck",
      "1-conserving derivative of A[N n] at the shape equals N times n_part", 1e-5,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const Fn& A : catalog<double>()) {
          const F rho = s.positive_profile<double>(ctx.grid);
          worst = std::max(worst, shape_crosscheck(A, rho));
        }
        const F affine = F::sample(ctx.grid, [](double x) { return 2 * x + 1; });
        worst = std::max(worst, shape_crosscheck(square_integral<double>(), affine));
        return worst;
      });

  add("l-shape-normalization", "sum w h l = 1", 1e-12, Metric::Absolute,
      [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (int k = 0; k < ctx.draws; ++k) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const F h = s.positive_profile<double>(ctx.grid);
          const F g = s.signed_profile<double>(ctx.grid);
          const auto split = l_split(g, rho, h, KT(inner(h, rho)));
          worst = std::max(worst, std::abs(inner(h, split.shape) - 1.0));
        }
        return worst;
      });

  add("l-shape-reconstruction",
      "n_part + h shape_part = g and n_part = L-conserving derivative", 1e-12, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (int k = 0; k < ctx.draws; ++k) {
          const F rho = s.positive_profile<double>(ctx.grid);
          const F h = s.positive_profile<double>(ctx.grid);
          const F g = s.signed_profile<double>(ctx.grid);
          const KT L(inner(h, rho));
          const auto split = l_split(g, rho, h, L);
          worst = std::max(worst, max_abs_diff(split.n_part + h * split.shape_part, g));
          // Same h as a constraint; the sampled field is indexed by node position.
          const auto& nodes = ctx.grid->nodes();
          const C linear = C::weighted_linear(
              [h, &nodes](double x) {
                const auto i = std::lower_bound(nodes.data(), nodes.data() + nodes.size(), x) -
                               nodes.data();
                return h[i];
              },
              "linear:sampled");
          worst = std::max(worst, max_abs_diff(split.n_part, k_derivative(g, rho, linear, L)));
        }
        return worst;
      });

  add("deformed-gateaux",
      "directional derivative along extend(rho + eps delta) = inner(k_derivative, delta)", 1e-5,
      Metric::Absolute, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const C& c : builtin_constraints(ctx.grid))
          for (const Fn& A : catalog<double>()) {
            auto [rho, K] = draw_on_set(s, ctx.grid, c);
            for (int k = 0; k < ctx.draws; ++k) {
              const F delta = bounded_direction(s, rho);
              worst = std::max(worst, deformed_gateaux_residual(A, rho, delta, c, K));
            }
          }
        return worst;
      });

  add("deformed-gateaux-projected",
      "deformed directional derivative along projected directions", 1e-5, Metric::Absolute,
      [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const C& c : builtin_constraints(ctx.grid))
          for (const Fn& A : catalog<double>()) {
            auto [rho, K] = draw_on_set(s, ctx.grid, c);
            const F delta = bounded_direction(s, rho);
            worst = std::max(worst, deformed_gateaux_residual(A, rho, delta, c, K, true));
          }
        return worst;
      });

  add("linear-straight-path",
      "linear constraint: deformed derivative = plain directional derivative along conserving delta",
      1e-8, Metric::Absolute, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        const C c = builtin_constraints(ctx.grid).back();
        const F h = f_prime_values(F::constant(ctx.grid, 1.0), c);
        double worst = 0;
        for (const Fn& A : catalog<double>()) {
          auto [rho, K] = draw_on_set(s, ctx.grid, c);
          F delta = bounded_direction(s, rho);
          delta = delta - h * (inner(h, delta) / inner(h, h));
          const double deformed = directional(A, rho, delta, c, K).value;
          auto straight = [&](double eps) {
            return (A(rho + delta * eps) - A(rho - delta * eps)) / (2 * eps);
          };
          const double e1 = straight(1e-3), e2 = straight(5e-4);
          worst = std::max(worst, std::abs(deformed - (e2 + (e2 - e1) / 3)));
        }
        return worst;
      });

  add("constraint-invertibility", "f^-1(f(rho)) = rho and f' of one strict sign", 1e-10,
      Metric::Relative, [](const Context& ctx, std::uint64_t seed) {
        FieldSampler s(seed);
        double worst = 0;
        for (const C& c : builtin_constraints(ctx.grid))
          for (int k = 0; k < ctx.draws; ++k) {
            const auto rep = check_invertibility(c, s.positive_profile<double>(ctx.grid));
            worst = std::max(worst, rep.monotone ? rep.max_roundtrip_error
                                                 : std::numeric_limits<double>::infinity());
          }
        return worst;
      });

  add("closed-form-k-derivative",
      "rho = x + 1/2, A = int rho^2, f = rho: derivative is 2x - 7/6", 1e-4, Metric::MaxNorm,
      [](const Context& ctx, std::uint64_t) {
        const F rho = F::sample(ctx.grid, [](double x) { return x + 0.5; });
        const F expected = F::sample(ctx.grid, [](double x) { return 2 * x - 7.0 / 6.0; });
        const F g = gradient(square_integral<double>(), rho);
        return max_abs_diff(k_derivative(g, rho, C::identity(), KT(1.0)), expected);
      });

  add("closed-form-gateaux", "rho = x + 1/2, delta = sin 2 pi x: deformed derivative is -1/pi",
      1e-4, Metric::Absolute, [](const Context& ctx, std::uint64_t) {
        const F rho = F::sample(ctx.grid, [](double x) { return x + 0.5; });
        const F delta = F::sample(ctx.grid, [](double x) { return std::sin(2 * kPi * x); });
        const auto probe = directional(square_integral<double>(), rho, delta, C::identity(), KT(1.0));
        return std::abs(probe.value + 1.0 / kPi);
      });

  add("flow-minimizer",
      "minimizing int rho^2 with int rho = 1 reaches rho = 1 and multiplier 2", 1e-6,
      Metric::MaxNorm, [](const Context& ctx, std::uint64_t) {
        const F rho0 = F::sample(ctx.grid, [](double x) { return x + 0.5; });
        const auto trace = minimize(square_integral<double>(), rho0, C::identity(), KT(1.0));
        if (trace.status != FlowStatus::Converged) return std::numeric_limits<double>::infinity();
        return std::max(max_abs(trace.final_field.plus_constant(-1.0)),
                        std::abs(trace.final_multiplier - 2.0));
      });

  add("flow-constraint-drift", "K[rho] constant along the descent trajectory", 1e-10,
      Metric::Absolute, [](const Context& ctx, std::uint64_t) {
        const F rho0 = F::sample(ctx.grid, [](double x) { return x + 0.5; });
        const auto trace = minimize(square_integral<double>(), rho0, C::identity(), KT(1.0));
        double worst = 0;
        for (const auto& r : trace.records) worst = std::max(worst, std::abs(r.k_value - 1.0));
        return worst;
      });

  return cases;
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::MaxNorm: return "max-norm";
    case Metric::Absolute: return "absolute";
    case Metric::Relative: return "relative";
  }
  return "unknown";
}

bool Report::all_passed() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.passed; });
}

std::vector<ConstraintSpec<double>> builtin_constraints(const GridPtr<double>& grid) {
  const double X = grid->length();
  return {C::identity(), C::power(2.0), C::power(0.5), C::exponential(),
          C::weighted_linear([X](double x) { return 1.0 + 0.5 * std::sin(2 * kPi * x / X); },
                             "linear:1+sin/2")};
}

const std::vector<std::string>& required_identity_ids() {
  static const std::vector<std::string> ids = {
      "restricted-ambiguity",
      "ambiguity-cancellation",
      "projection-annihilation",
      "weight-normalization",
      "projection-adjoint",
      "equal-on-constraint-set",
      "constraint-functional-annihilation",
      "scale-invariant-unconstrained",
      "k-homogeneity",
      "homogeneity-euler-identity",
      "k-independent-unconstrained",
      "extension-gradient",
      "extension-idempotence",
      "extension-exactness",
      "shape-reconstruction",
      "shape-conserving-average",
      "shape-functional-crosscheck",
      "number-shape-sum",
      "l-shape-normalization",
      "l-shape-reconstruction",
      "deformed-gateaux",
      "chain-rule-multiplier-shift",
  };
  return ids;
}

std::vector<IdentityCase> identity_cases() { return build_cases(); }

Report run_cases(const std::vector<IdentityCase>& cases, const Context& ctx) {
  Report report;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const IdentityCase& ic = cases[i];
    const std::uint64_t case_seed = ctx.seed * 0x9E3779B97F4A7C15ULL + (i + 1) * 0xBF58476D1CE4E5B9ULL;
    Row row{ic.id, ic.description, ic.metric, 0.0, ic.tolerance, false, {}};
    try {
      row.residual = ic.worst_residual(ctx, case_seed);
      row.passed = std::isfinite(row.residual) && row.residual <= ic.tolerance;
    } catch (const std::exception& e) {
      row.residual = std::numeric_limits<double>::infinity();
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

Report run_all(std::uint64_t seed, Eigen::Index n) {
  Context ctx;
  ctx.seed = seed;
  ctx.grid = Grid<double>::periodic(n, 1.0);
  return run_cases(identity_cases(), ctx);
}

}  // namespace kfunc::suite
