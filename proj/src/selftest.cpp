#include "fdrkit/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <utility>

#include "fdrkit/basis.hpp"
#include "fdrkit/edr.hpp"
#include "fdrkit/error.hpp"
#include "fdrkit/kernel_smoothing.hpp"
#include "fdrkit/sim_bench.hpp"

namespace fdrkit {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Composite Simpson rule with `panels` (even) subintervals.
double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

Dataset random_centered(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, p);
  Vector y(n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < p; ++j) x(k, j) = normal(rng);
    y[k] = normal(rng);
  }
  return center(Dataset(make_uniform_grid(p), std::move(x), std::move(y)));
}

CheckResult kernel_normalization(const SelfTestHooks& hooks) {
  double worst = 0.0;
  for (KernelKind kind : {KernelKind::epanechnikov2, KernelKind::quartic4}) {
    const Kernel k{kind};
    auto kk = [&](double u) { return hooks.kernel_scale * k(u); };
    worst = std::max(worst, std::abs(simpson(kk, -1.0, 1.0) - 1.0));
    worst = std::max(worst, std::abs(simpson([&](double u) { return u * kk(u); }, -1.0, 1.0)));
    if (kind == KernelKind::quartic4) {
      worst = std::max(worst, std::abs(simpson([&](double u) { return u * u * kk(u); }, -1.0, 1.0)));
      worst = std::max(worst, std::abs(simpson([&](double u) { return std::pow(u, 4) * kk(u); }, -1.0, 1.0) + 1.0 / 21));
    }
  }
  return {"kernel_normalization", worst <= 1e-8, fmt("max moment error %.3g", worst)};
}

CheckResult smoother_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Dataset ds = random_centered(12, 8, seed);
    const SmootherState s(ds, Kernel{}, 0.9, 0.05);
    const int n = ds.n(), p = ds.p();
    const double h = s.h();
    for (int i = 0; i < n; ++i) {
      const double y = ds.ys[i];
      double f = 0.0;
      Vector m = Vector::Zero(p);
      Matrix mm = Matrix::Zero(p, p);
      for (int k = 0; k < n; ++k) {
        const double w = Kernel{}((ds.ys[k] - y) / h) / (n * h);
        f += w;
        for (int a = 0; a < p; ++a) {
          m[a] += w * ds.xs(k, a);
          for (int b = 0; b < p; ++b) mm(a, b) += w * ds.xs(k, a) * ds.xs(k, b);
        }
      }
      const double fe = std::max(f, s.e_n());
      const Vector r = m / fe;
      const Matrix c = mm / fe - r * r.transpose();
      worst = std::max(worst, std::abs(s.density_hat(y) - f) / std::max(1.0, std::abs(f)));
      worst = std::max(worst, rel_diff(s.m_hat(y).values, m));
      worst = std::max(worst, rel_diff(s.M_hat(y).matrix, mm));
      worst = std::max(worst, rel_diff(s.r_hat(y).values, r));
      worst = std::max(worst, rel_diff(s.R_hat(y).matrix, mm / fe));
      worst = std::max(worst, rel_diff(s.C_hat(y).matrix, c));
    }
  }
  return {"smoother_oracle", worst <= 1e-10, fmt("max relative error %.3g", worst)};
}

CheckResult coordinate_moments_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 11; seed <= 13; ++seed) {
    const Dataset ds = random_centered(15, 10, seed);
    const LinearOp gamma = empirical_covariance(ds);
    const TruncatedCov tc = truncate_and_invert(gamma, pca_basis(gamma, 3));
    const SmootherState s(ds, Kernel{KernelKind::epanechnikov2}, 1.0, 0.05);
    const CoordinateMoments mom = coordinate_moments(s, tc);
    worst = std::max(worst, rel_diff(mom.gamma_e, to_coordinates(tc.basis, gamma_e_hat(s))));
    worst = std::max(worst, rel_diff(mom.psi, to_coordinates(tc.basis, psi_hat(s, tc))));
  }
  return {"coordinate_moments_oracle", worst <= 1e-10, fmt("max relative error %.3g", worst)};
}

CheckResult clipping_inequality_check() {
  int violations = 0, points = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const int n = 100;
    Vector y(n);
    for (int k = 0; k < n; ++k) y[k] = normal(rng);
    const Dataset ds(make_uniform_grid(3), Matrix::Zero(n, 3), y, true);
    const std::span<const double> ys(y.data(), n);
    const double h = cv_bandwidth(ys, Kernel{}, default_bandwidth_grid(ys));
    const SmootherState s = SmootherState::with_clipping(ds, Kernel{}, h, default_clipping(Kernel{}));
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    const double lo = y.minCoeff(), hi = y.maxCoeff();
    double sup = 0.0;
    for (int g = 0; g <= 2000; ++g) {
      const double t = lo + (hi - lo) * g / 2000.0;
      sup = std::max(sup, std::abs(s.density_hat(t) - phi(t)));
    }
    const double e = s.e_n();
    for (int j = 0; j < n; ++j) {
      const double fj = phi(y[j]);
      const double lhs = std::abs(s.clipped_density(y[j]) - s.density_hat(y[j])) / std::max(e, fj);
      const double rhs = 2.0 * ((fj < 2.0 * e ? 1.0 : 0.0) + sup * sup / (e * e));
      ++points;
      if (lhs > rhs) ++violations;
    }
  }
  return {"clipping_inequality", violations == 0,
          fmt("%.0f of %.0f sample points violate", violations, points)};
}

CheckResult density_integrates() {
  const Dataset ds = random_centered(200, 3, 5);
  const SmootherState s(ds, Kernel{}, 0.4, 0.05);
  const double lo = ds.ys.minCoeff() - 0.5, hi = ds.ys.maxCoeff() + 0.5;
  const double total = simpson([&](double y) { return s.density_hat(y); }, lo, hi, 4000);
  return {"density_integrates_to_one", std::abs(total - 1.0) <= 0.01, fmt("integral %.6f", total)};
}

CheckResult projector_distances() {
  const GridPtr g = make_uniform_grid(50);
  auto poly = [&](int k) { return Curve::sample(g, [k](double t) { return std::pow(t, k); }); };
  const LinearOp p12 = span_projector({poly(0), poly(1)});
  const LinearOp p12b =
      span_projector({Curve(g, poly(0).values + 3.0 * poly(1).values), Curve(g, poly(1).values - poly(0).values)});
  const double same = subspace_distance(p12, p12b);

  // sines of distinct frequencies are exactly orthogonal under the trapezoid rule
  auto sine = [&](int k) { return Curve::sample(g, [k](double t) { return std::sin(2 * std::numbers::pi * k * t); }); };
  const double orth = subspace_distance(span_projector({sine(1), sine(2)}), span_projector({sine(3), sine(4)}));
  const double shared = subspace_distance(span_projector({sine(1), sine(2)}), span_projector({sine(1), sine(3)}));
  const double err = std::max({same, std::abs(orth - 2.0), std::abs(shared - std::sqrt(2.0))});
  return {"projector_distances", err <= 1e-6, fmt("max error %.3g", err)};
}

CheckResult brownian_covariance() {
  const Grid g = Grid::uniform(21);
  const Matrix x = brownian_paths(g, 4000, 99);
  double worst = 0.0;
  for (int a : {5, 10, 20})
    for (int b : {5, 10, 20}) {
      const double emp = x.col(a).dot(x.col(b)) / x.rows();
      worst = std::max(worst, std::abs(emp - std::min(g.points()[a], g.points()[b])));
    }
  return {"brownian_covariance", worst <= 0.08, fmt("max |cov - min(s,t)| %.3g", worst)};
}

CheckResult brownian_pca_eigenvalues() {
  const GridPtr g = make_uniform_grid(100);
  Matrix c(100, 100);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) c(i, j) = std::min(g->points()[i], g->points()[j]);
  const Basis b = pca_basis(LinearOp(g, c), 3);
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double exact = 1.0 / (std::pow(j + 0.5, 2) * std::numbers::pi * std::numbers::pi);
    worst = std::max(worst, std::abs((*b.eigenvalues)[j] / exact - 1.0));
  }
  return {"brownian_pca_eigenvalues", worst <= 0.02, fmt("max relative error %.3g", worst)};
}

CheckResult bspline_partition() {
  const Grid g = Grid::uniform(101);
  double worst = 0.0;
  bool negative = false;
  for (int D : {3, 4, 8}) {
    const Matrix b = bspline_raw(g, D);
    worst = std::max(worst, (b.rowwise().sum().array() - 1.0).abs().maxCoeff());
    negative = negative || b.minCoeff() < -1e-14;
  }
  return {"bspline_partition_of_unity", worst <= 1e-12 && !negative,
          fmt("max |sum - 1| %.3g", worst) + (negative ? ", negative value" : "")};
}

CheckResult model_norms() {
  const GridPtr g = make_uniform_grid(100);
  const ModelSpec m1 = ModelSpec::make(ModelId::model1, g);
  const ModelSpec m2 = ModelSpec::make(ModelId::model2, g);
  const double a = inner_product(m1.betas[0], m1.betas[0]);
  const double b = inner_product(m2.betas[1], m2.betas[1]);
  const double err = std::max(std::abs(a - 8.0 / 7.0), std::abs(b - 0.5));
  return {"model_beta_norms", err <= 1e-3, fmt("<b1,b1> = %.6f, <b2,b2> = %.6f", a, b)};
}

CheckResult estimator_determinism() {
  const GridPtr g = make_uniform_grid(40);
  const Dataset ds = generate(ModelSpec::make(ModelId::model1, g), g, 60, 3);
  FaveConfig cfg;
  bool same = true;
  for (Method m : {Method::fave, Method::fsir, Method::fsave}) {
    const EdrEstimate a = estimate(m, ds, cfg);
    const EdrEstimate b = estimate(m, ds, cfg);
    same = same && a.directions == b.directions && a.eigenvalues == b.eigenvalues;
  }
  return {"estimator_determinism", same, same ? "bit-identical reruns" : "reruns differ"};
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelfTestHooks& hooks) {
  const std::vector<std::pair<const char*, std::function<CheckResult()>>> checks{
      {"kernel_normalization", [&] { return kernel_normalization(hooks); }},
      {"smoother_oracle", smoother_oracle},
      {"coordinate_moments_oracle", coordinate_moments_oracle},
      {"clipping_inequality", clipping_inequality_check},
      {"density_integrates_to_one", density_integrates},
      {"projector_distances", projector_distances},
      {"brownian_covariance", brownian_covariance},
      {"brownian_pca_eigenvalues", brownian_pca_eigenvalues},
      {"bspline_partition_of_unity", bspline_partition},
      {"model_beta_norms", model_norms},
      {"estimator_determinism", estimator_determinism},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, check] : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

int cmd_selftest(std::ostream& out, const SelfTestHooks& hooks) {
  const auto results = run_selftest(hooks);
  int failed = 0;
  char line[256];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-28s %-4s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    out << line;
    if (!r.passed) ++failed;
  }
  out << results.size() - static_cast<std::size_t>(failed) << '/' << results.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace fdrkit
