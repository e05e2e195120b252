#pragma once

#include <optional>
#include <string>

#include "fdrkit/fda_core.hpp"

namespace fdrkit {

enum class BasisKind { pca, bspline };

const char* to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& s);

/// An <.,.>-orthonormal system phi_1..phi_D spanning the truncation space S_D.
struct Basis {
  GridPtr grid;
  Matrix functions;  // p x D, column j is phi_j on the grid
  BasisKind kind;
  std::optional<Vector> eigenvalues;  // PCA only, nonincreasing

  Basis(GridPtr g, Matrix f, BasisKind k, std::optional<Vector> ev = std::nullopt);

  int dim() const noexcept { return static_cast<int>(functions.cols()); }
  Curve function(int j) const { return Curve(grid, functions.col(j)); }

  /// D x D Gram matrix of the stored functions.
  Matrix gram() const;
  /// Coordinates <phi_j, f> of each column of `values` (p x m) -> D x m.
  Matrix coordinates(const Matrix& values) const;
};

/// Leading D eigenfunctions of a self-adjoint PSD operator.
///
/// Eigenfunctions are <.,.>-orthonormal and signed so that the first grid value
/// with magnitude above 1e-8 is positive. Throws a rank error when the D-th
/// eigenvalue is not numerically positive.
Basis pca_basis(const LinearOp& gamma_hat, int D);

/// Raw clamped quadratic B-splines with D functions and D - 3 equally spaced
/// interior knots, evaluated on the grid (p x D). Not orthonormal.
Matrix bspline_raw(const Grid& grid, int D);

/// bspline_raw followed by modified Gram-Schmidt in the <.,.> metric.
Basis bspline_basis(const GridPtr& grid, int D);

/// Pi = sum_j phi_j (x) phi_j.
LinearOp projector(const Basis& basis);

/// Truncated covariance Pi Gamma Pi and its inverse on S_D.
///
/// Besides the p x p operators, the D x D coordinate matrix
/// coords[j,k] = <phi_j, Gamma phi_k> and its spectral factors are kept, since
/// the estimators do all their algebra in basis coordinates.
struct TruncatedCov {
  Basis basis;
  LinearOp gamma_d;
  LinearOp pinv;
  LinearOp pinv_sqrt;
  double t_d;

  Matrix coords;           // G
  Matrix coords_inv;       // G^{-1}
  Matrix coords_inv_sqrt;  // G^{-1/2}
};

inline constexpr double kDefaultRidge = 1e-12;

TruncatedCov truncate_and_invert(const LinearOp& gamma_hat, const Basis& basis,
                                 double ridge = kDefaultRidge);

/// Lift a D x D coordinate matrix C to the operator Phi C Phi^T on H.
LinearOp lift(const Basis& basis, const Matrix& coords);

/// D x D coordinates Phi^T W A W Phi of an operator.
Matrix to_coordinates(const Basis& basis, const LinearOp& op);

/// Flip the sign of each column so that its first entry with magnitude above
/// `threshold` is positive.
void apply_sign_convention(Matrix& columns, double threshold = 1e-8);

}  // namespace fdrkit
