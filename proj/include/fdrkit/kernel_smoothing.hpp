#pragma once

#include <span>
#include <string>

#include "fdrkit/fda_core.hpp"

namespace fdrkit {

enum class KernelKind { epanechnikov2, quartic4 };

const char* to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& s);

/// Compact kernel on [-1, 1].
///
///   epanechnikov2: (3/4)(1 - u^2), order 2, nonnegative
///   quartic4:      (15/32)(3 - 10u^2 + 7u^4), order 4, negative for 3/7 < u^2 < 1
struct Kernel {
  KernelKind kind = KernelKind::quartic4;

  int order() const noexcept { return kind == KernelKind::quartic4 ? 4 : 2; }
  double operator()(double u) const noexcept;
};

double kernel_eval(const Kernel& kernel, double u);

/// Clipping floor min(a_cap, n^{-c2}).
double clipping_floor(int n, double a_cap, double c2);

/// Whether c2 lies strictly inside (0, (k-2)/(4(k+1))) for a kernel of order
/// k. Only informational; the estimators accept any positive floor.
bool clipping_exponent_admissible(const Kernel& kernel, double c2);

struct ClippingParams {
  double a_cap = 0.05;
  double c2 = 0.09;
};

/// Default exponent for the kernel: 0.09 for order 4 and 0.1 otherwise.
ClippingParams default_clipping(const Kernel& kernel);

/// Kernel estimates of the response density and of the first two conditional
/// moments of X given Y, over a centered dataset with fixed bandwidth h and
/// clipping floor e_n.
///
/// Evaluations at a sample point Y_i keep the i-th term.
class SmootherState {
 public:
  SmootherState(Dataset ds, Kernel kernel, double h, double e_n);
  /// Floor from min(a_cap, n^{-c2}).
  static SmootherState with_clipping(Dataset ds, Kernel kernel, double h, ClippingParams clip);

  const Dataset& dataset() const noexcept { return ds_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  double h() const noexcept { return h_; }
  double e_n() const noexcept { return e_n_; }

  /// (nh)^{-1} K((Y_i - y)/h) for every observation.
  Vector weights(double y) const;

  double density_hat(double y) const;
  double clipped_density(double y) const;
  bool clipping_active(double y) const { return density_hat(y) < e_n_; }

  Curve m_hat(double y) const;
  LinearOp M_hat(double y) const;
  Curve r_hat(double y) const;
  LinearOp R_hat(double y) const;
  /// R_hat - r_hat (x) r_hat.
  LinearOp C_hat(double y) const;

 private:
  Dataset ds_;
  Kernel kernel_;
  double h_;
  double e_n_;
};

/// Least-squares cross-validation score int f^2 - (2/n) sum f_{-i}(Y_i).
double lscv_score(std::span<const double> ys, const Kernel& kernel, double h);

/// Bandwidth from `grid_of_h` minimising the LSCV score; ties go to the
/// smaller h.
double cv_bandwidth(std::span<const double> ys, const Kernel& kernel, std::span<const double> grid_of_h);
double cv_bandwidth(const Dataset& ds, const Kernel& kernel, std::span<const double> grid_of_h);

/// 40 log-spaced bandwidths from 0.05 sd(Y) to 2 sd(Y).
std::vector<double> default_bandwidth_grid(std::span<const double> ys);

}  // namespace fdrkit
