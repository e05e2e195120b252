#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdrkit/basis.hpp"
#include "fdrkit/fda_core.hpp"
#include "fdrkit/kernel_smoothing.hpp"

namespace fdrkit {

enum class Method { fave, fsir, fsave };

const char* to_string(Method m);
Method parse_method(const std::string& s);

/// Response scale the kernel smoothers see. The EDR space is unchanged by any
/// strictly monotone map of Y, but the clipping floor e_n is a density level
/// and only means something on a fixed scale.
///
///   none:        Y as given
///   standardize: (Y - mean) / sd
///   rank:        (midrank - 1/2) / n, approximately uniform on (0, 1)
enum class ResponseTransform { none, standardize, rank };

const char* to_string(ResponseTransform t);
ResponseTransform parse_response_transform(const std::string& s);

Vector transform_response(const Vector& ys, ResponseTransform t);

struct FaveConfig {
  int D = 4;
  BasisKind basis_kind = BasisKind::pca;
  int K = 2;
  Kernel kernel{};
  std::optional<double> bandwidth;           // unset: cross-validation
  std::vector<double> bandwidth_grid;        // empty: default_bandwidth_grid
  std::optional<ClippingParams> clipping;    // unset: default_clipping(kernel)
  std::optional<double> clipping_floor;      // explicit e_n, overrides `clipping`
  double ridge = kDefaultRidge;
  ResponseTransform response = ResponseTransform::rank;
  int slices = 10;                           // FSAVE only

  void validate(int p) const;
};

struct EdrEstimate {
  GridPtr grid;
  Matrix directions;  // p x K, unit <.,.>-norm columns
  Vector eigenvalues;  // K, nonincreasing
  double t_d = 0.0;
  Method method = Method::fave;
  std::map<std::string, double> diagnostics;

  int K() const noexcept { return static_cast<int>(directions.cols()); }
  Curve direction(int k) const { return Curve(grid, directions.col(k)); }
};

/// n^{-1} sum_i r_hat(Y_i) (x) r_hat(Y_i).
LinearOp gamma_e_hat(const SmootherState& s);

/// n^{-1} sum_i C_hat(Y_i) pinv C_hat(Y_i).
LinearOp psi_hat(const SmootherState& s, const TruncatedCov& tc);

struct InterestOperator {
  LinearOp interest;  // pinv (2 Gamma_e + Psi - Gamma_n)
  LinearOp g_hat;     // 2 Gamma_e + Psi - Gamma_n
};

InterestOperator gamma_I_hat(const SmootherState& s, const TruncatedCov& tc);

/// The estimator ingredients restricted to S_D, as D x D coordinate matrices.
/// Computed in O(n^2 D^2) without forming any p x p operator.
struct CoordinateMoments {
  Matrix gamma_e;  // coordinates of gamma_e_hat
  Matrix psi;      // coordinates of psi_hat
  int clipping_active = 0;
};

CoordinateMoments coordinate_moments(const SmootherState& s, const TruncatedCov& tc);

/// Leading K eigenpairs of G^{-1/2} g G^{-1/2}, mapped back to H through
/// Gamma_D^{-1/2} and normalised. `g_coords` is the D x D coordinate matrix
/// of the operator G_hat.
EdrEstimate extract_directions_coords(const Matrix& g_coords, const TruncatedCov& tc, int K);
EdrEstimate extract_directions(const LinearOp& g_hat, const TruncatedCov& tc, int K);

/// Sliced counterpart (1/H) sum_h (G - V_h) G^{-1} (G - V_h) in coordinates.
/// `ds` must be centered and `tc` built from its empirical covariance.
Matrix fsave_coordinates(const Dataset& ds, const TruncatedCov& tc, int slices);

/// Equal-count slices of the indices sorted by Y; the first n mod H slices get
/// one extra observation.
std::vector<std::vector<int>> equal_count_slices(const Vector& ys, int slices);

EdrEstimate fave(const Dataset& ds, const FaveConfig& cfg);
EdrEstimate fsir(const Dataset& ds, const FaveConfig& cfg);
EdrEstimate fsave_sliced(const Dataset& ds, int D, int K, int H, BasisKind basis_kind = BasisKind::pca,
                         double ridge = kDefaultRidge);
EdrEstimate fsave_sliced(const Dataset& ds, const FaveConfig& cfg);

EdrEstimate estimate(Method method, const Dataset& ds, const FaveConfig& cfg);

}  // namespace fdrkit
