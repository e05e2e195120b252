#include "fdrkit/fda_core.hpp"

#include <cmath>
#include <string>

#include "fdrkit/error.hpp"

namespace fdrkit {

namespace {

Vector trapezoid_weights(const Vector& t) {
  const Eigen::Index p = t.size();
  Vector w = Vector::Zero(p);
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    const double half = 0.5 * (t[i + 1] - t[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
  if (!same_grid(a, b)) throw Error(ErrorKind::dimension, std::string(what) + ": grid mismatch");
}

}  // namespace

Grid::Grid(Vector points, Vector weights) : points_(std::move(points)), weights_(std::move(weights)) {
  const Eigen::Index p = points_.size();
  if (p < 2) throw Error(ErrorKind::parameter, "grid needs at least 2 points");
  if (points_[0] != 0.0 || points_[p - 1] != 1.0)
    throw Error(ErrorKind::parameter, "grid must start at 0 and end at 1");
  for (Eigen::Index i = 0; i + 1 < p; ++i)
    if (!(points_[i + 1] > points_[i]))
      throw Error(ErrorKind::parameter, "grid points must be strictly increasing");
  if ((weights_.array() <= 0.0).any()) throw Error(ErrorKind::parameter, "grid weights must be positive");
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw Error(ErrorKind::parameter, "grid weights must sum to 1");
}

Grid Grid::uniform(int p) {
  if (p < 2) throw Error(ErrorKind::parameter, "grid needs at least 2 points");
  Vector t(p);
  for (int i = 0; i < p; ++i) t[i] = static_cast<double>(i) / (p - 1);
  t[p - 1] = 1.0;
  Vector w = trapezoid_weights(t);
  return Grid(std::move(t), std::move(w));
}

Grid Grid::from_points(std::span<const double> points) {
  Vector t = Eigen::Map<const Vector>(points.data(), static_cast<Eigen::Index>(points.size()));
  if (t.size() < 2) throw Error(ErrorKind::parameter, "grid needs at least 2 points");
  Vector w = trapezoid_weights(t);
  return Grid(std::move(t), std::move(w));
}

bool Grid::is_uniform(double tol) const {
  const double step = 1.0 / (size() - 1);
  for (int i = 0; i + 1 < size(); ++i)
    if (std::abs(points_[i + 1] - points_[i] - step) > tol) return false;
  return true;
}

bool Grid::operator==(const Grid& other) const {
  return points_.size() == other.points_.size() && points_ == other.points_;
}

GridPtr make_uniform_grid(int p) { return std::make_shared<const Grid>(Grid::uniform(p)); }

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) return false;
  return a == b || *a == *b;
}

Curve::Curve(GridPtr g, Vector v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw Error(ErrorKind::contract, "curve without grid");
  if (values.size() != grid->size()) throw Error(ErrorKind::dimension, "curve length differs from grid size");
  if (!values.allFinite()) throw Error(ErrorKind::contract, "curve values must be finite");
}

Curve Curve::zero(GridPtr g) {
  const int p = g->size();
  return Curve(std::move(g), Vector::Zero(p));
}

LinearOp::LinearOp(GridPtr g, Matrix m) : grid(std::move(g)), matrix(std::move(m)) {
  if (!grid) throw Error(ErrorKind::contract, "operator without grid");
  if (matrix.rows() != grid->size() || matrix.cols() != grid->size())
    throw Error(ErrorKind::dimension, "operator matrix must be p x p");
  if (!matrix.allFinite()) throw Error(ErrorKind::contract, "operator entries must be finite");
}

LinearOp LinearOp::zero(GridPtr g) {
  const int p = g->size();
  return LinearOp(std::move(g), Matrix::Zero(p, p));
}

LinearOp LinearOp::identity(GridPtr g) {
  Matrix m = g->weights().cwiseInverse().asDiagonal();
  return LinearOp(std::move(g), std::move(m));
}

Dataset::Dataset(GridPtr g, Matrix x, Vector y, bool is_centered)
    : grid(std::move(g)), xs(std::move(x)), ys(std::move(y)), centered(is_centered) {
  if (!grid) throw Error(ErrorKind::contract, "dataset without grid");
  if (ys.size() < 2) throw Error(ErrorKind::insufficient_data, "dataset needs n >= 2");
  if (xs.rows() != ys.size()) throw Error(ErrorKind::dimension, "number of curves differs from number of responses");
  if (xs.cols() != grid->size()) throw Error(ErrorKind::dimension, "curve length differs from grid size");
  if (!xs.allFinite() || !ys.allFinite()) throw Error(ErrorKind::contract, "dataset values must be finite");
  if (centered && xs.colwise().mean().cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorKind::contract, "dataset flagged centered but has nonzero mean");
}

double inner_product(const Curve& a, const Curve& b) {
  require_same_grid(a.grid, b.grid, "inner_product");
  return (a.grid->weights().array() * a.values.array() * b.values.array()).sum();
}

double norm(const Curve& a) { return std::sqrt(inner_product(a, a)); }

LinearOp outer_product(const Curve& x, const Curve& y) {
  require_same_grid(x.grid, y.grid, "outer_product");
  return LinearOp(x.grid, y.values * x.values.transpose());
}

Curve apply(const LinearOp& op, const Curve& f) {
  require_same_grid(op.grid, f.grid, "apply");
  return Curve(f.grid, op.matrix * op.grid->weights().cwiseProduct(f.values));
}

LinearOp compose(const LinearOp& a, const LinearOp& b) {
  require_same_grid(a.grid, b.grid, "compose");
  return LinearOp(a.grid, a.matrix * a.grid->weights().asDiagonal() * b.matrix);
}

LinearOp add(const LinearOp& a, const LinearOp& b) {
  require_same_grid(a.grid, b.grid, "add");
  return LinearOp(a.grid, a.matrix + b.matrix);
}

LinearOp scale(double c, const LinearOp& a) { return LinearOp(a.grid, c * a.matrix); }

Matrix metric_symmetrized(const LinearOp& op) {
  const Vector s = op.grid->weights().cwiseSqrt();
  return s.asDiagonal() * op.matrix * s.asDiagonal();
}

double hs_norm(const LinearOp& op) { return metric_symmetrized(op).norm(); }

Dataset center(const Dataset& ds) {
  if (ds.n() < 2) throw Error(ErrorKind::insufficient_data, "centering needs n >= 2");
  const Eigen::RowVectorXd mean = ds.xs.colwise().mean();
  Matrix xc = ds.xs.rowwise() - mean;
  return Dataset(ds.grid, std::move(xc), ds.ys, true);
}

LinearOp empirical_covariance(const Dataset& ds) {
  if (!ds.centered) throw Error(ErrorKind::contract, "empirical_covariance requires a centered dataset");
  Matrix cov = (ds.xs.transpose() * ds.xs) / static_cast<double>(ds.n());
  // X^T X is symmetric in exact arithmetic; remove rounding asymmetry
  cov = 0.5 * (cov + cov.transpose()).eval();
  return LinearOp(ds.grid, std::move(cov));
}

}  // namespace fdrkit
