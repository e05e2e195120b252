#include "fdrkit/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fdrkit/error.hpp"

namespace fdrkit {

namespace {

constexpr int kSplineOrder = 3;  // quadratic

double max_asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

std::vector<double> clamped_knots(int D) {
  const int interior = D - kSplineOrder;
  std::vector<double> knots;
  knots.reserve(D + kSplineOrder);
  for (int i = 0; i < kSplineOrder; ++i) knots.push_back(0.0);
  for (int i = 1; i <= interior; ++i) knots.push_back(static_cast<double>(i) / (interior + 1));
  for (int i = 0; i < kSplineOrder; ++i) knots.push_back(1.0);
  return knots;
}

// Index of the knot span [knots[s], knots[s+1]) containing t; the right end
// t = 1 is assigned to the last nonempty span.
int find_span(const std::vector<double>& knots, int n_basis, double t) {
  constexpr int degree = kSplineOrder - 1;
  if (t >= knots[n_basis]) return n_basis - 1;
  auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n_basis + 1, t);
  return static_cast<int>(it - knots.begin()) - 1;
}

// Nonzero basis functions N_{span-2..span} at t by the triangular de Boor
// recursion.
std::array<double, kSplineOrder> nonzero_basis(const std::vector<double>& knots, int span, double t) {
  constexpr int degree = kSplineOrder - 1;
  std::array<double, kSplineOrder> n{};
  std::array<double, kSplineOrder> left{}, right{};
  n[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  return n;
}

// Modified Gram-Schmidt in the quadrature metric, two passes.
Matrix orthonormalize(const Matrix& raw, const Vector& w) {
  Matrix q = raw;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      for (Eigen::Index k = 0; k < j; ++k) {
        const double c = (w.array() * q.col(k).array() * q.col(j).array()).sum();
        q.col(j) -= c * q.col(k);
      }
      const double nrm = std::sqrt((w.array() * q.col(j).array().square()).sum());
      if (!(nrm > 1e-12)) throw Error(ErrorKind::rank, "basis functions are linearly dependent on this grid");
      q.col(j) /= nrm;
    }
  }
  return q;
}

}  // namespace

const char* to_string(BasisKind kind) { return kind == BasisKind::pca ? "pca" : "bspline"; }

BasisKind parse_basis_kind(const std::string& s) {
  if (s == "pca") return BasisKind::pca;
  if (s == "bspline") return BasisKind::bspline;
  throw Error(ErrorKind::validation, "unknown basis kind '" + s + "' (expected pca or bspline)");
}

Basis::Basis(GridPtr g, Matrix f, BasisKind k, std::optional<Vector> ev)
    : grid(std::move(g)), functions(std::move(f)), kind(k), eigenvalues(std::move(ev)) {
  if (functions.cols() < 1) throw Error(ErrorKind::parameter, "basis needs D >= 1");
  if (functions.rows() != grid->size()) throw Error(ErrorKind::dimension, "basis functions must live on the grid");
  if (eigenvalues && eigenvalues->size() != functions.cols())
    throw Error(ErrorKind::dimension, "one eigenvalue per basis function");
  const double residual = (gram() - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  if (residual > 1e-8) throw Error(ErrorKind::contract, "basis is not orthonormal");
}

Matrix Basis::gram() const { return functions.transpose() * grid->weights().asDiagonal() * functions; }

Matrix Basis::coordinates(const Matrix& values) const {
  return functions.transpose() * grid->weights().asDiagonal() * values;
}

void apply_sign_convention(Matrix& columns, double threshold) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double v = columns(i, j);
      if (std::abs(v) > threshold) {
        if (v < 0) columns.col(j) *= -1.0;
        break;
      }
    }
  }
}

Basis pca_basis(const LinearOp& gamma_hat, int D) {
  const int p = gamma_hat.grid->size();
  if (D < 1 || D > p) throw Error(ErrorKind::parameter, "PCA dimension must satisfy 1 <= D <= p");
  const double scale = std::max(1.0, gamma_hat.matrix.cwiseAbs().maxCoeff());
  if (max_asymmetry(gamma_hat.matrix) > 1e-10 * scale)
    throw Error(ErrorKind::contract, "pca_basis requires a symmetric operator");

  const Vector& w = gamma_hat.grid->weights();
  Matrix sym = metric_symmetrized(gamma_hat);
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::rank, "eigendecomposition failed");

  // Eigen sorts ascending
  Vector values(D);
  Matrix vectors(p, D);
  for (int j = 0; j < D; ++j) {
    values[j] = eig.eigenvalues()[p - 1 - j];
    vectors.col(j) = eig.eigenvectors().col(p - 1 - j);
  }
  const double top = eig.eigenvalues()[p - 1];
  if (!(values[D - 1] > 1e-10 * std::max(top, 0.0)) || !(values[D - 1] > 0.0))
    throw Error(ErrorKind::rank, "D exceeds the numerical rank of the covariance", values[D - 1]);

  Matrix phi = w.cwiseSqrt().cwiseInverse().asDiagonal() * vectors;
  apply_sign_convention(phi);
  return Basis(gamma_hat.grid, std::move(phi), BasisKind::pca, std::move(values));
}

Matrix bspline_raw(const Grid& grid, int D) {
  if (D < kSplineOrder) throw Error(ErrorKind::parameter, "quadratic B-spline basis needs D >= 3");
  const auto knots = clamped_knots(D);
  Matrix b = Matrix::Zero(grid.size(), D);
  for (int i = 0; i < grid.size(); ++i) {
    const double t = grid.points()[i];
    const int span = find_span(knots, D, t);
    const auto n = nonzero_basis(knots, span, t);
    for (int r = 0; r < kSplineOrder; ++r) b(i, span - (kSplineOrder - 1) + r) = n[r];
  }
  return b;
}

Basis bspline_basis(const GridPtr& grid, int D) {
  Matrix raw = bspline_raw(*grid, D);
  return Basis(grid, orthonormalize(raw, grid->weights()), BasisKind::bspline);
}

LinearOp projector(const Basis& basis) {
  return LinearOp(basis.grid, basis.functions * basis.functions.transpose());
}

LinearOp lift(const Basis& basis, const Matrix& coords) {
  return LinearOp(basis.grid, basis.functions * coords * basis.functions.transpose());
}

Matrix to_coordinates(const Basis& basis, const LinearOp& op) {
  if (!same_grid(basis.grid, op.grid)) throw Error(ErrorKind::dimension, "to_coordinates: grid mismatch");
  const auto wphi = basis.grid->weights().asDiagonal() * basis.functions;
  return wphi.transpose() * op.matrix * wphi;
}

TruncatedCov truncate_and_invert(const LinearOp& gamma_hat, const Basis& basis, double ridge) {
  const double scale = std::max(1.0, gamma_hat.matrix.cwiseAbs().maxCoeff());
  if (max_asymmetry(gamma_hat.matrix) > 1e-10 * scale)
    throw Error(ErrorKind::contract, "truncate_and_invert requires a symmetric operator");

  Matrix g = to_coordinates(basis, gamma_hat);
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::singularity, "eigendecomposition of G failed");
  const double t_d = eig.eigenvalues().minCoeff();
  if (!(t_d > ridge))
    throw Error(ErrorKind::singularity, "truncated covariance is numerically singular (t_D = " +
                                            std::to_string(t_d) + ")", t_d);

  const Matrix& v = eig.eigenvectors();
  const Vector& lam = eig.eigenvalues();
  Matrix inv = v * lam.cwiseInverse().asDiagonal() * v.transpose();
  Matrix inv_sqrt = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();

  TruncatedCov tc{basis,
                  lift(basis, g),
                  lift(basis, inv),
                  lift(basis, inv_sqrt),
                  t_d,
                  g,
                  inv,
                  inv_sqrt};
  return tc;
}

}  // namespace fdrkit
