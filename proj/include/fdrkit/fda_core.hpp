#pragma once

// Discretized elements of L2([0,1]) and operators acting on them.
//
// A curve is stored by its values on a fixed grid. Inner products use the
// grid's quadrature weights w, so <f,g> = sum_i w_i f(t_i) g(t_i). An operator
// A is stored by its plain value matrix and acts as
//
//     (A f)(t_i) = sum_j w_j A[i,j] f(t_j),
//
// which makes the rank-one operator (x (x) y)(h) = <x,h> y simply y x^T.

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fdrkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Grid {
 public:
  /// p equally spaced points 0 = t_1 < ... < t_p = 1 with trapezoidal weights.
  static Grid uniform(int p);
  /// Arbitrary strictly increasing points from 0 to 1; trapezoidal weights.
  static Grid from_points(std::span<const double> points);

  int size() const noexcept { return static_cast<int>(points_.size()); }
  const Vector& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  bool is_uniform(double tol = 1e-12) const;

  bool operator==(const Grid& other) const;

 private:
  Grid(Vector points, Vector weights);
  Vector points_;
  Vector weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_uniform_grid(int p);

/// True when the two grids are the same object or have identical points.
bool same_grid(const GridPtr& a, const GridPtr& b);

struct Curve {
  GridPtr grid;
  Vector values;

  Curve(GridPtr g, Vector v);
  /// Zero curve on g.
  static Curve zero(GridPtr g);
  /// Sample a function of t on every grid point.
  template <class F>
  static Curve sample(GridPtr g, F&& fn) {
    Vector v(g->size());
    for (int i = 0; i < g->size(); ++i) v[i] = fn(g->points()[i]);
    return Curve(std::move(g), std::move(v));
  }
};

struct LinearOp {
  GridPtr grid;
  Matrix matrix;

  LinearOp(GridPtr g, Matrix m);
  static LinearOp zero(GridPtr g);
  /// The identity of H on the grid: A[i,j] = delta_ij / w_j.
  static LinearOp identity(GridPtr g);
};

struct Dataset {
  GridPtr grid;
  Matrix xs;   // n x p, row k holds X_k on the grid
  Vector ys;   // n responses
  bool centered = false;

  Dataset(GridPtr g, Matrix x, Vector y, bool is_centered = false);

  int n() const noexcept { return static_cast<int>(ys.size()); }
  int p() const noexcept { return grid->size(); }
  Curve curve(int k) const { return Curve(grid, xs.row(k).transpose()); }
};

double inner_product(const Curve& a, const Curve& b);
double norm(const Curve& a);

/// (x (x) y)(h) = <x,h> y.
LinearOp outer_product(const Curve& x, const Curve& y);

Curve apply(const LinearOp& op, const Curve& f);
LinearOp compose(const LinearOp& a, const LinearOp& b);
LinearOp add(const LinearOp& a, const LinearOp& b);
LinearOp scale(double c, const LinearOp& a);

double hs_norm(const LinearOp& op);

/// W^{1/2} A W^{1/2}: the operator expressed in an orthonormal frame of the
/// quadrature metric. Symmetric iff A is self-adjoint in <.,.>.
Matrix metric_symmetrized(const LinearOp& op);

Dataset center(const Dataset& ds);

/// n^{-1} sum_k X_k (x) X_k for a centered dataset.
LinearOp empirical_covariance(const Dataset& ds);

}  // namespace fdrkit
