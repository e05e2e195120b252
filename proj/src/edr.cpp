#include "fdrkit/edr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdrkit/error.hpp"

namespace fdrkit {

namespace {

template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

struct Prepared {
  Dataset centered;
  LinearOp gamma;
  TruncatedCov tc;
};

Prepared prepare(const Dataset& ds, int D, BasisKind kind, double ridge) {
  Dataset centered = staged("center", [&] { return center(ds); });
  LinearOp gamma = staged("covariance", [&] { return empirical_covariance(centered); });
  Basis basis = staged("basis", [&] {
    return kind == BasisKind::pca ? pca_basis(gamma, D) : bspline_basis(ds.grid, D);
  });
  TruncatedCov tc = staged("truncation", [&] { return truncate_and_invert(gamma, basis, ridge); });
  return Prepared{std::move(centered), std::move(gamma), std::move(tc)};
}

SmootherState make_smoother(const Dataset& centered_in, const FaveConfig& cfg) {
  return staged("smoother", [&] {
    Dataset centered = centered_in;
    centered.ys = transform_response(centered_in.ys, cfg.response);
    double h;
    if (cfg.bandwidth) {
      h = *cfg.bandwidth;
    } else {
      const std::span<const double> ys(centered.ys.data(), static_cast<std::size_t>(centered.n()));
      const auto grid = cfg.bandwidth_grid.empty() ? default_bandwidth_grid(ys) : cfg.bandwidth_grid;
      h = cv_bandwidth(ys, cfg.kernel, grid);
    }
    if (cfg.clipping_floor) return SmootherState(centered, cfg.kernel, h, *cfg.clipping_floor);
    return SmootherState::with_clipping(centered, cfg.kernel, h,
                                        cfg.clipping.value_or(default_clipping(cfg.kernel)));
  });
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void fill_common_diagnostics(EdrEstimate& est, const Dataset& ds, const TruncatedCov& tc) {
  est.diagnostics["n"] = ds.n();
  est.diagnostics["D"] = tc.basis.dim();
  est.diagnostics["K"] = est.K();
  est.diagnostics["basis_bspline"] = tc.basis.kind == BasisKind::bspline ? 1.0 : 0.0;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::fave: return "fave";
    case Method::fsir: return "fsir";
    case Method::fsave: return "fsave";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "fave") return Method::fave;
  if (s == "fsir") return Method::fsir;
  if (s == "fsave") return Method::fsave;
  throw Error(ErrorKind::validation, "unknown method '" + s + "' (expected fave, fsir or fsave)");
}

const char* to_string(ResponseTransform t) {
  switch (t) {
    case ResponseTransform::none: return "none";
    case ResponseTransform::standardize: return "standardize";
    case ResponseTransform::rank: return "rank";
  }
  return "unknown";
}

ResponseTransform parse_response_transform(const std::string& s) {
  if (s == "none") return ResponseTransform::none;
  if (s == "standardize") return ResponseTransform::standardize;
  if (s == "rank") return ResponseTransform::rank;
  throw Error(ErrorKind::validation, "unknown response transform '" + s + "' (expected none, standardize or rank)");
}

Vector transform_response(const Vector& ys, ResponseTransform t) {
  const Eigen::Index n = ys.size();
  switch (t) {
    case ResponseTransform::none:
      return ys;
    case ResponseTransform::standardize: {
      if (n < 2) throw Error(ErrorKind::insufficient_data, "standardizing needs n >= 2");
      const double mean = ys.mean();
      const double sd = std::sqrt((ys.array() - mean).square().sum() / static_cast<double>(n - 1));
      if (!(sd > 0.0)) throw Error(ErrorKind::parameter, "responses are constant");
      return (ys.array() - mean) / sd;
    }
    case ResponseTransform::rank: {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ys[a] < ys[b]; });
      Vector u(n);
      for (Eigen::Index lo = 0; lo < n;) {
        Eigen::Index hi = lo;
        while (hi + 1 < n && ys[order[hi + 1]] == ys[order[lo]]) ++hi;
        // tied values share their mean 1-based rank
        const double midrank = 0.5 * static_cast<double>(lo + hi) + 1.0;
        for (Eigen::Index k = lo; k <= hi; ++k) u[order[k]] = (midrank - 0.5) / static_cast<double>(n);
        lo = hi + 1;
      }
      return u;
    }
  }
  return ys;
}

void FaveConfig::validate(int p) const {
  if (D < 1 || D > p) throw Error(ErrorKind::parameter, "D must satisfy 1 <= D <= p");
  if (K < 1 || K > D) throw Error(ErrorKind::parameter, "K must satisfy 1 <= K <= D");
  if (basis_kind == BasisKind::bspline && D < 3) throw Error(ErrorKind::parameter, "B-spline basis needs D >= 3");
  if (bandwidth && !(*bandwidth > 0.0)) throw Error(ErrorKind::parameter, "bandwidth must be positive");
  if (clipping_floor && !(*clipping_floor > 0.0)) throw Error(ErrorKind::parameter, "clipping floor must be positive");
  if (!(ridge >= 0.0)) throw Error(ErrorKind::parameter, "ridge must be nonnegative");
}

LinearOp gamma_e_hat(const SmootherState& s) {
  const Dataset& ds = s.dataset();
  const int p = ds.p();
  Matrix acc = Matrix::Zero(p, p);
  for (int i = 0; i < ds.n(); ++i) {
    const Vector r = s.r_hat(ds.ys[i]).values;
    acc.noalias() += r * r.transpose();
  }
  acc /= static_cast<double>(ds.n());
  return LinearOp(ds.grid, symmetrize(acc));
}

LinearOp psi_hat(const SmootherState& s, const TruncatedCov& tc) {
  const Dataset& ds = s.dataset();
  if (!same_grid(ds.grid, tc.basis.grid)) throw Error(ErrorKind::dimension, "psi_hat: grid mismatch");
  const int p = ds.p();
  const Matrix wphi = ds.grid->weights().asDiagonal() * tc.basis.functions;
  Matrix acc = Matrix::Zero(p, p);
  for (int i = 0; i < ds.n(); ++i) {
    const Matrix b = s.C_hat(ds.ys[i]).matrix * wphi;  // p x D
    acc.noalias() += b * tc.coords_inv * b.transpose();
  }
  acc /= static_cast<double>(ds.n());
  return LinearOp(ds.grid, symmetrize(acc));
}

InterestOperator gamma_I_hat(const SmootherState& s, const TruncatedCov& tc) {
  const LinearOp gamma_n = empirical_covariance(s.dataset());
  LinearOp g = add(add(scale(2.0, gamma_e_hat(s)), psi_hat(s, tc)), scale(-1.0, gamma_n));
  LinearOp interest = compose(tc.pinv, g);
  return InterestOperator{std::move(interest), std::move(g)};
}

CoordinateMoments coordinate_moments(const SmootherState& s, const TruncatedCov& tc) {
  const Dataset& ds = s.dataset();
  if (!same_grid(ds.grid, tc.basis.grid)) throw Error(ErrorKind::dimension, "coordinate_moments: grid mismatch");
  const int n = ds.n();
  const int D = tc.basis.dim();
  const Matrix x = tc.basis.coordinates(ds.xs.transpose());  // D x n

  CoordinateMoments out{Matrix::Zero(D, D), Matrix::Zero(D, D), 0};
  for (int i = 0; i < n; ++i) {
    const Vector w = s.weights(ds.ys[i]);
    const double f = w.sum();
    if (f < s.e_n()) ++out.clipping_active;
    const double fe = std::max(s.e_n(), f);
    const Vector r = x * w / fe;
    const Matrix c = x * w.asDiagonal() * x.transpose() / fe - r * r.transpose();
    out.gamma_e.noalias() += r * r.transpose();
    out.psi.noalias() += c * tc.coords_inv * c;
  }
  out.gamma_e = symmetrize(out.gamma_e) / n;
  out.psi = symmetrize(out.psi) / n;
  return out;
}

EdrEstimate extract_directions_coords(const Matrix& g_coords, const TruncatedCov& tc, int K) {
  const int D = tc.basis.dim();
  if (K < 1 || K > D) throw Error(ErrorKind::parameter, "number of directions must satisfy 1 <= K <= D");
  if (g_coords.rows() != D || g_coords.cols() != D)
    throw Error(ErrorKind::dimension, "coordinate matrix must be D x D");

  const Matrix sym = symmetrize(tc.coords_inv_sqrt * g_coords * tc.coords_inv_sqrt);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::singularity, "eigendecomposition failed");

  EdrEstimate est;
  est.grid = tc.basis.grid;
  est.t_d = tc.t_d;
  est.eigenvalues.resize(K);
  Matrix coeffs(D, K);
  for (int k = 0; k < K; ++k) {
    est.eigenvalues[k] = eig.eigenvalues()[D - 1 - k];
    coeffs.col(k) = tc.coords_inv_sqrt * eig.eigenvectors().col(D - 1 - k);
    // the basis is orthonormal, so the coefficient norm is the H-norm
    coeffs.col(k).normalize();
  }
  est.directions = tc.basis.functions * coeffs;
  apply_sign_convention(est.directions);
  return est;
}

EdrEstimate extract_directions(const LinearOp& g_hat, const TruncatedCov& tc, int K) {
  return extract_directions_coords(to_coordinates(tc.basis, g_hat), tc, K);
}

std::vector<std::vector<int>> equal_count_slices(const Vector& ys, int slices) {
  const int n = static_cast<int>(ys.size());
  if (slices < 2) throw Error(ErrorKind::parameter, "slicing needs H >= 2");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ys[a] < ys[b]; });
  const int base = n / slices, extra = n % slices;
  std::vector<std::vector<int>> out(slices);
  int pos = 0;
  for (int h = 0; h < slices; ++h) {
    const int count = base + (h < extra ? 1 : 0);
    if (count < 2)
      throw Error(ErrorKind::slicing, "slice " + std::to_string(h) + " has fewer than 2 observations");
    out[h].assign(order.begin() + pos, order.begin() + pos + count);
    pos += count;
  }
  return out;
}

Matrix fsave_coordinates(const Dataset& ds, const TruncatedCov& tc, int slices) {
  if (!ds.centered) throw Error(ErrorKind::contract, "fsave requires a centered dataset");
  const auto groups = equal_count_slices(ds.ys, slices);
  const int D = tc.basis.dim();
  const Matrix x = tc.basis.coordinates(ds.xs.transpose());  // D x n
  Matrix acc = Matrix::Zero(D, D);
  for (const auto& idx : groups) {
    const int nh = static_cast<int>(idx.size());
    Matrix xs(D, nh);
    for (int k = 0; k < nh; ++k) xs.col(k) = x.col(idx[k]);
    const Vector mean = xs.rowwise().mean();
    xs.colwise() -= mean;
    const Matrix v = xs * xs.transpose() / nh;
    const Matrix diff = tc.coords - v;
    acc.noalias() += diff * tc.coords_inv * diff;
  }
  return symmetrize(acc) / static_cast<double>(slices);
}

EdrEstimate fave(const Dataset& ds, const FaveConfig& cfg) {
  staged("config", [&] { cfg.validate(ds.p()); return 0; });
  Prepared prep = prepare(ds, cfg.D, cfg.basis_kind, cfg.ridge);
  const SmootherState s = make_smoother(prep.centered, cfg);
  const CoordinateMoments mom = staged("moments", [&] { return coordinate_moments(s, prep.tc); });
  const Matrix g = 2.0 * mom.gamma_e + mom.psi - prep.tc.coords;
  EdrEstimate est = staged("eigen", [&] { return extract_directions_coords(g, prep.tc, cfg.K); });
  est.method = Method::fave;
  fill_common_diagnostics(est, ds, prep.tc);
  est.diagnostics["h"] = s.h();
  est.diagnostics["e_n"] = s.e_n();
  est.diagnostics["clipping_active"] = mom.clipping_active;
  return est;
}

EdrEstimate fsir(const Dataset& ds, const FaveConfig& cfg) {
  staged("config", [&] { cfg.validate(ds.p()); return 0; });
  Prepared prep = prepare(ds, cfg.D, cfg.basis_kind, cfg.ridge);
  const SmootherState s = make_smoother(prep.centered, cfg);
  const CoordinateMoments mom = staged("moments", [&] { return coordinate_moments(s, prep.tc); });
  EdrEstimate est = staged("eigen", [&] { return extract_directions_coords(mom.gamma_e, prep.tc, cfg.K); });
  est.method = Method::fsir;
  fill_common_diagnostics(est, ds, prep.tc);
  est.diagnostics["h"] = s.h();
  est.diagnostics["e_n"] = s.e_n();
  est.diagnostics["clipping_active"] = mom.clipping_active;
  return est;
}

EdrEstimate fsave_sliced(const Dataset& ds, int D, int K, int H, BasisKind basis_kind, double ridge) {
  FaveConfig cfg;
  cfg.D = D;
  cfg.K = K;
  cfg.slices = H;
  cfg.basis_kind = basis_kind;
  cfg.ridge = ridge;
  return fsave_sliced(ds, cfg);
}

EdrEstimate fsave_sliced(const Dataset& ds, const FaveConfig& cfg) {
  staged("config", [&] {
    cfg.validate(ds.p());
    if (cfg.slices < 2) throw Error(ErrorKind::parameter, "FSAVE needs H >= 2 slices");
    return 0;
  });
  Prepared prep = prepare(ds, cfg.D, cfg.basis_kind, cfg.ridge);
  const Matrix g = staged("slicing", [&] { return fsave_coordinates(prep.centered, prep.tc, cfg.slices); });
  EdrEstimate est = staged("eigen", [&] { return extract_directions_coords(g, prep.tc, cfg.K); });
  est.method = Method::fsave;
  fill_common_diagnostics(est, ds, prep.tc);
  est.diagnostics["slices"] = cfg.slices;
  return est;
}

EdrEstimate estimate(Method method, const Dataset& ds, const FaveConfig& cfg) {
  switch (method) {
    case Method::fave: return fave(ds, cfg);
    case Method::fsir: return fsir(ds, cfg);
    case Method::fsave: return fsave_sliced(ds, cfg);
  }
  throw Error(ErrorKind::parameter, "unknown method");
}

}  // namespace fdrkit
