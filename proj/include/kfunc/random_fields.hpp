#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "kfunc/grid.hpp"

namespace kfunc {

/// Seeded source of smooth random profiles. Draws use the raw 64-bit
/// mt19937_64 output, so sequences are identical across standard libraries.
class FieldSampler {
 public:
  explicit FieldSampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  std::uint64_t next_index(std::uint64_t n) { return engine_() % n; }

  /// b + sum_{k=1..3} a_k sin(2 pi k x / X + phi_k), signed amplitudes in [-1, 1].
  template <typename Scalar>
  Field<Scalar> signed_profile(const GridPtr<Scalar>& grid) {
    Mode modes[3];
    for (auto& m : modes) m = {uniform(-1, 1), uniform(0, 2 * std::numbers::pi)};
    const double offset = uniform(-0.5, 0.5);
    return evaluate<Scalar>(grid, modes, offset);
  }

  /// Sine modes plus a constant exceeding the amplitude sum by at least 0.5,
  /// so the profile stays positive.
  template <typename Scalar>
  Field<Scalar> positive_profile(const GridPtr<Scalar>& grid) {
    Mode modes[3];
    double amp = 0;
    for (auto& m : modes) {
      m = {uniform(0.05, 0.4), uniform(0, 2 * std::numbers::pi)};
      amp += m.amplitude;
    }
    const double offset = amp + uniform(0.5, 1.5);
    return evaluate<Scalar>(grid, modes, offset);
  }

 private:
  struct Mode {
    double amplitude;
    double phase;
  };

  template <typename Scalar>
  static Field<Scalar> evaluate(const GridPtr<Scalar>& grid, const Mode (&modes)[3], double offset) {
    const double X = static_cast<double>(grid->length());
    return Field<Scalar>::sample(grid, [&](Scalar x) {
      double v = offset;
      for (int k = 0; k < 3; ++k)
        v += modes[k].amplitude *
             std::sin(2 * std::numbers::pi * (k + 1) * static_cast<double>(x) / X + modes[k].phase);
      return Scalar(v);
    });
  }

  std::mt19937_64 engine_;
};

}  // namespace kfunc
