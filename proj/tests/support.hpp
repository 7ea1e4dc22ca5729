#pragma once

#include <cstdint>

#include "kfunc/kfunc.hpp"
#include "kfunc/random_fields.hpp"

namespace kfunc::testing {

using F = Field<double>;
using C = ConstraintSpec<double>;
using KT = KTarget<double>;
using Fn = Functional<double>;
using W = WeightChoice<double>;

inline GridPtr<double> unit_grid(Eigen::Index n = 200) { return Grid<double>::periodic(n, 1.0); }

inline std::vector<C> constraints(const GridPtr<double>& grid) {
  const double X = grid->length();
  return {C::identity(), C::power(2.0), C::power(0.5), C::exponential(),
          C::weighted_linear([X](double x) { return 1.0 + 0.5 * std::sin(2 * std::numbers::pi * x / X); })};
}

inline F affine(const GridPtr<double>& grid) {
  return F::sample(grid, [](double x) { return x + 0.5; });
}

/// Plain-loop quadrature sum, independent of the library's Eigen reductions.
inline double loop_sum(const F& a) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a.grid().weights()[i] * a[i];
  return s;
}

}  // namespace kfunc::testing
