#include "fdrkit/kernel_smoothing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "fdrkit/error.hpp"

namespace fdrkit {

namespace {

// 5-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 9,
// which covers every product of two kernels used here.
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

// int K(u) K(u - d) du.
double kernel_autoconvolution(const Kernel& k, double d) {
  const double lo = std::max(-1.0, d - 1.0);
  const double hi = std::min(1.0, d + 1.0);
  if (!(hi > lo)) return 0.0;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double s = 0.0;
  for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
    const double u = mid + half * kGlNodes[q];
    s += kGlWeights[q] * k(u) * k(u - d);
  }
  return half * s;
}

double sample_sd(std::span<const double> ys) {
  const double n = static_cast<double>(ys.size());
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

const char* to_string(KernelKind kind) {
  return kind == KernelKind::quartic4 ? "quartic4" : "epanechnikov2";
}

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "quartic4") return KernelKind::quartic4;
  if (s == "epanechnikov2") return KernelKind::epanechnikov2;
  throw Error(ErrorKind::validation, "unknown kernel '" + s + "' (expected quartic4 or epanechnikov2)");
}

double Kernel::operator()(double u) const noexcept {
  if (u < -1.0 || u > 1.0) return 0.0;
  const double u2 = u * u;
  if (kind == KernelKind::quartic4) return (15.0 / 32.0) * (3.0 - 10.0 * u2 + 7.0 * u2 * u2);
  return 0.75 * (1.0 - u2);
}

double kernel_eval(const Kernel& kernel, double u) { return kernel(u); }

double clipping_floor(int n, double a_cap, double c2) {
  if (n < 1 || !(a_cap > 0.0)) throw Error(ErrorKind::parameter, "clipping floor needs n >= 1 and a_cap > 0");
  return std::min(a_cap, std::pow(static_cast<double>(n), -c2));
}

bool clipping_exponent_admissible(const Kernel& kernel, double c2) {
  const double k = kernel.order();
  return c2 > 0.0 && c2 < (k - 2.0) / (4.0 * (k + 1.0));
}

ClippingParams default_clipping(const Kernel& kernel) {
  return ClippingParams{0.05, kernel.order() == 4 ? 0.09 : 0.1};
}

SmootherState::SmootherState(Dataset ds, Kernel kernel, double h, double e_n)
    : ds_(std::move(ds)), kernel_(kernel), h_(h), e_n_(e_n) {
  if (!ds_.centered) throw Error(ErrorKind::contract, "smoother requires a centered dataset");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw Error(ErrorKind::parameter, "bandwidth must be positive");
  if (!(e_n_ > 0.0) || !std::isfinite(e_n_)) throw Error(ErrorKind::parameter, "clipping floor must be positive");
}

SmootherState SmootherState::with_clipping(Dataset ds, Kernel kernel, double h, ClippingParams clip) {
  const double e_n = clipping_floor(ds.n(), clip.a_cap, clip.c2);
  return SmootherState(std::move(ds), kernel, h, e_n);
}

Vector SmootherState::weights(double y) const {
  const int n = ds_.n();
  const double c = 1.0 / (n * h_);
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = c * kernel_((ds_.ys[i] - y) / h_);
  return w;
}

double SmootherState::density_hat(double y) const { return weights(y).sum(); }

double SmootherState::clipped_density(double y) const { return std::max(e_n_, density_hat(y)); }

Curve SmootherState::m_hat(double y) const {
  return Curve(ds_.grid, ds_.xs.transpose() * weights(y));
}

LinearOp SmootherState::M_hat(double y) const {
  const Vector w = weights(y);
  Matrix m = ds_.xs.transpose() * w.asDiagonal() * ds_.xs;
  m = 0.5 * (m + m.transpose()).eval();
  return LinearOp(ds_.grid, std::move(m));
}

Curve SmootherState::r_hat(double y) const {
  const Vector w = weights(y);
  const double fe = std::max(e_n_, w.sum());
  return Curve(ds_.grid, ds_.xs.transpose() * w / fe);
}

LinearOp SmootherState::R_hat(double y) const {
  const Vector w = weights(y);
  const double fe = std::max(e_n_, w.sum());
  Matrix m = ds_.xs.transpose() * w.asDiagonal() * ds_.xs / fe;
  m = 0.5 * (m + m.transpose()).eval();
  return LinearOp(ds_.grid, std::move(m));
}

LinearOp SmootherState::C_hat(double y) const {
  const Vector w = weights(y);
  const double fe = std::max(e_n_, w.sum());
  const Vector r = ds_.xs.transpose() * w / fe;
  Matrix c = ds_.xs.transpose() * w.asDiagonal() * ds_.xs / fe - r * r.transpose();
  c = 0.5 * (c + c.transpose()).eval();
  return LinearOp(ds_.grid, std::move(c));
}

double lscv_score(std::span<const double> ys, const Kernel& kernel, double h) {
  if (ys.size() < 2) throw Error(ErrorKind::insufficient_data, "cross-validation needs n >= 2");
  if (!(h > 0.0)) throw Error(ErrorKind::parameter, "bandwidth must be positive");
  std::vector<double> y(ys.begin(), ys.end());
  std::sort(y.begin(), y.end());
  const std::size_t n = y.size();

  // sum over ordered pairs (i, j); pairs farther apart than 2h do not overlap
  double conv_sum = n * kernel_autoconvolution(kernel, 0.0);
  double loo_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (y[j] - y[i]) / h;
      if (d >= 2.0) break;
      conv_sum += 2.0 * kernel_autoconvolution(kernel, d);
      if (d <= 1.0) loo_sum += 2.0 * kernel(d);
    }
  }
  const double nd = static_cast<double>(n);
  const double integral_f2 = conv_sum / (nd * nd * h);
  const double loo_mean = loo_sum / ((nd - 1.0) * h) / nd;
  return integral_f2 - 2.0 * loo_mean;
}

double cv_bandwidth(std::span<const double> ys, const Kernel& kernel, std::span<const double> grid_of_h) {
  if (grid_of_h.empty()) throw Error(ErrorKind::parameter, "bandwidth grid is empty");
  for (double h : grid_of_h)
    if (!(h > 0.0)) throw Error(ErrorKind::parameter, "bandwidth grid must be positive");
  std::vector<double> hs(grid_of_h.begin(), grid_of_h.end());
  std::sort(hs.begin(), hs.end());
  double best_h = hs.front();
  double best = lscv_score(ys, kernel, best_h);
  for (std::size_t k = 1; k < hs.size(); ++k) {
    const double score = lscv_score(ys, kernel, hs[k]);
    if (score < best) {
      best = score;
      best_h = hs[k];
    }
  }
  return best_h;
}

double cv_bandwidth(const Dataset& ds, const Kernel& kernel, std::span<const double> grid_of_h) {
  return cv_bandwidth(std::span<const double>(ds.ys.data(), static_cast<std::size_t>(ds.n())), kernel,
                      grid_of_h);
}

std::vector<double> default_bandwidth_grid(std::span<const double> ys) {
  if (ys.size() < 2) throw Error(ErrorKind::insufficient_data, "bandwidth grid needs n >= 2");
  const double sd = sample_sd(ys);
  if (!(sd > 0.0)) throw Error(ErrorKind::parameter, "responses are constant; no bandwidth scale");
  constexpr int count = 40;
  const double lo = std::log(0.05 * sd), hi = std::log(2.0 * sd);
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) grid[k] = std::exp(lo + (hi - lo) * k / (count - 1));
  return grid;
}

}  // namespace fdrkit
