#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>

#include "kfunc/error.hpp"

namespace kfunc {

/// Nodes and quadrature weights for a 1-D domain [0, length).
///
/// Periodic grids place nodes at cell midpoints with uniform weights, so the
/// quadrature is the midpoint rule. Bounded grids place nodes on both
/// endpoints and use trapezoid weights. In both cases the weights sum to the
/// domain length.
template <typename Scalar>
class Grid {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static std::shared_ptr<const Grid> periodic(Eigen::Index n, Scalar length) {
    check_args(n, length, 1);
    Vector nodes(n);
    const Scalar h = length / Scalar(n);
    for (Eigen::Index i = 0; i < n; ++i) nodes[i] = (Scalar(i) + Scalar(0.5)) * h;
    return std::shared_ptr<const Grid>(
        new Grid(length, true, std::move(nodes), Vector::Constant(n, h)));
  }

  static std::shared_ptr<const Grid> bounded(Eigen::Index n, Scalar length) {
    check_args(n, length, 2);
    const Scalar h = length / Scalar(n - 1);
    Vector nodes(n);
    for (Eigen::Index i = 0; i < n; ++i) nodes[i] = Scalar(i) * h;
    Vector weights = Vector::Constant(n, h);
    weights[0] = weights[n - 1] = h / Scalar(2);
    return std::shared_ptr<const Grid>(
        new Grid(length, false, std::move(nodes), std::move(weights)));
  }

  Eigen::Index size() const { return nodes_.size(); }
  Scalar length() const { return length_; }
  bool is_periodic() const { return periodic_; }
  /// Node spacing.
  Scalar spacing() const {
    return periodic_ ? length_ / Scalar(size()) : length_ / Scalar(size() - 1);
  }
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }

  bool same_as(const Grid& other) const {
    return this == &other ||
           (size() == other.size() && length_ == other.length_ &&
            periodic_ == other.periodic_);
  }

 private:
  Grid(Scalar length, bool periodic, Vector nodes, Vector weights)
      : length_(length),
        periodic_(periodic),
        nodes_(std::move(nodes)),
        weights_(std::move(weights)) {}

  static void check_args(Eigen::Index n, Scalar length, Eigen::Index min_n) {
    if (n < min_n)
      throw Error(ErrorKind::InvalidArgument,
                  "grid needs at least " + std::to_string(min_n) + " nodes, got " +
                      std::to_string(n));
    if (!(length > Scalar(0)) || !std::isfinite(static_cast<double>(length)))
      throw Error(ErrorKind::InvalidArgument, "grid length must be positive and finite");
  }

  Scalar length_;
  bool periodic_;
  Vector nodes_;
  Vector weights_;
};

template <typename Scalar>
using GridPtr = std::shared_ptr<const Grid<Scalar>>;

/// Real samples on a grid. Values are always finite and sized to the grid.
template <typename Scalar>
class Field {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Field(GridPtr<Scalar> grid, Vector values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw Error(ErrorKind::InvalidArgument, "field without a grid");
    if (values_.size() != grid_->size())
      throw Error(ErrorKind::InvalidArgument,
                  "field has " + std::to_string(values_.size()) + " values for a grid of " +
                      std::to_string(grid_->size()) + " nodes");
    for (Eigen::Index i = 0; i < values_.size(); ++i)
      if (!std::isfinite(static_cast<double>(values_[i])))
        throw Error(ErrorKind::InvalidArgument, "non-finite field value",
                    static_cast<std::size_t>(i));
  }

  static Field constant(GridPtr<Scalar> grid, Scalar c) {
    const auto n = grid->size();
    return Field(std::move(grid), Vector::Constant(n, c));
  }

  static Field zero(GridPtr<Scalar> grid) { return constant(std::move(grid), Scalar(0)); }

  /// Samples `fn(x)` at every node.
  template <typename Fn>
  static Field sample(GridPtr<Scalar> grid, Fn&& fn) {
    Vector v(grid->size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(grid->nodes()[i]);
    return Field(std::move(grid), std::move(v));
  }

  /// A field on the same grid with different samples.
  Field with_values(Vector values) const { return Field(grid_, std::move(values)); }

  const Grid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }
  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

  Field operator+(const Field& o) const { return with_values(values_ + checked(o).values_); }
  Field operator-(const Field& o) const { return with_values(values_ - checked(o).values_); }
  Field operator-() const { return with_values(-values_); }
  Field operator*(Scalar s) const { return with_values(values_ * s); }
  friend Field operator*(Scalar s, const Field& f) { return f * s; }
  /// Node-wise product.
  Field cwiseProduct(const Field& o) const {
    return with_values(values_.cwiseProduct(checked(o).values_));
  }
  Field plus_constant(Scalar c) const {
    return with_values((values_.array() + c).matrix());
  }

  const Field& checked(const Field& o) const {
    if (!grid_->same_as(o.grid()))
      throw Error(ErrorKind::GridMismatch, "fields live on different grids");
    return o;
  }

 private:
  GridPtr<Scalar> grid_;
  Vector values_;
};

/// Quadrature sum of the field: sum_i w_i v_i.
template <typename Scalar>
Scalar integrate(const Field<Scalar>& field) {
  // Extended accumulation: constraint values feed the retraction, and their
  // rounding error would otherwise show up as drift in K.
  using Acc = std::conditional_t<std::is_same_v<Scalar, double>, long double, Scalar>;
  const auto& w = field.grid().weights();
  Acc s = 0;
  for (Eigen::Index i = 0; i < field.size(); ++i) s += Acc(w[i]) * Acc(field[i]);
  return Scalar(s);
}

/// Quadrature inner product: sum_i w_i a_i b_i.
template <typename Scalar>
Scalar inner(const Field<Scalar>& a, const Field<Scalar>& b) {
  a.checked(b);
  return (a.grid().weights().array() * a.values().array() * b.values().array()).sum();
}

/// Quadrature-weighted 2-norm.
template <typename Scalar>
Scalar norm(const Field<Scalar>& a) {
  using std::sqrt;
  return sqrt(inner(a, a));
}

template <typename Scalar>
Scalar max_abs(const Field<Scalar>& a) {
  return a.values().template lpNorm<Eigen::Infinity>();
}

template <typename Scalar>
Scalar max_abs_diff(const Field<Scalar>& a, const Field<Scalar>& b) {
  return max_abs(a - b);
}

/// Base step of the central-difference functional derivative; the step at
/// node i is kFdStep * (1 + |rho_i|).
inline constexpr double kFdStep = 1e-5;

/// Central-difference functional derivative of `value` at `rho`.
///
/// Returns (1/w_i) dA/drho_i, which is the discrete functional-derivative
/// density. `value` is any callable mapping a Field to a Scalar.
template <typename Scalar, typename ValueFn>
Field<Scalar> fd_gradient(const ValueFn& value, const Field<Scalar>& rho,
                          Scalar base_step = Scalar(kFdStep)) {
  using std::abs;
  const auto& w = rho.grid().weights();
  typename Field<Scalar>::Vector g(rho.size());
  typename Field<Scalar>::Vector probe = rho.values();
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const Scalar x0 = probe[i];
    const Scalar step = base_step * (Scalar(1) + abs(x0));
    const Scalar hi = x0 + step;
    const Scalar lo = x0 - step;
    probe[i] = hi;
    const Scalar up = value(rho.with_values(probe));
    probe[i] = lo;
    const Scalar down = value(rho.with_values(probe));
    probe[i] = x0;
    g[i] = (up - down) / ((hi - lo) * w[i]);
  }
  return rho.with_values(std::move(g));
}

}  // namespace kfunc
