#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fdrkit/edr.hpp"
#include "fdrkit/error.hpp"
#include "fdrkit/sim_bench.hpp"
#include "oracles.hpp"

using namespace fdrkit;

namespace {

const Kernel kEpan{KernelKind::epanechnikov2};

struct Fixture {
  Dataset ds;
  TruncatedCov tc;
};

Dataset random_centered(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix x(n, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  Vector y(n);
  for (auto& v : y) v = nd(rng);
  return center(Dataset(make_uniform_grid(p), x, y));
}

Fixture fixture(int n, int p, int D, std::uint64_t seed) {
  Dataset ds = random_centered(n, p, seed);
  const LinearOp gamma = empirical_covariance(ds);
  TruncatedCov tc = truncate_and_invert(gamma, pca_basis(gamma, D));
  return {std::move(ds), std::move(tc)};
}

double rel(const Matrix& a, const Matrix& b) {
  const double base = b.norm();
  return base > 0 ? (a - b).norm() / base : (a - b).norm();
}

double min_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

double proj_diff(const GridPtr& g, const Matrix& a, const Matrix& b) {
  return hs_norm(add(span_projector(g, a), scale(-1.0, span_projector(g, b))));
}

double index_of(const Curve& x, const Curve& beta) { return inner_product(x, beta); }

}  // namespace

TEST(Method, ParseAndPrint) {
  for (Method m : {Method::fave, Method::fsir, Method::fsave}) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("sir"), Error);
}

TEST(TransformResponse, MidranksAndStandardize) {
  const Vector y{{3.0, -1.0, 3.0, 10.0}};
  const Vector r = transform_response(y, ResponseTransform::rank);
  // sorted: -1 (rank 1), 3, 3 (ranks 2,3 -> 2.5), 10 (rank 4)
  EXPECT_DOUBLE_EQ(r[1], 0.5 / 4);
  EXPECT_DOUBLE_EQ(r[0], 2.0 / 4);
  EXPECT_DOUBLE_EQ(r[2], 2.0 / 4);
  EXPECT_DOUBLE_EQ(r[3], 3.5 / 4);
  const Vector s = transform_response(y, ResponseTransform::standardize);
  EXPECT_NEAR(s.mean(), 0.0, 1e-15);
  EXPECT_NEAR((s.array() - s.mean()).square().sum() / 3.0, 1.0, 1e-14);
  EXPECT_EQ(transform_response(y, ResponseTransform::none), y);
  EXPECT_THROW(transform_response(Vector::Constant(3, 2.0), ResponseTransform::standardize), Error);
  for (ResponseTransform t : {ResponseTransform::none, ResponseTransform::standardize, ResponseTransform::rank})
    EXPECT_EQ(parse_response_transform(to_string(t)), t);
  EXPECT_THROW(parse_response_transform("log"), Error);
}

TEST(GammaE, ZeroWhenAllCurvesEqual) {
  const GridPtr g = make_uniform_grid(5);
  const Dataset ds = center(Dataset(g, Matrix::Constant(4, 5, 1.5), Vector{{0.0, 10.0, 20.0, 30.0}}));
  const SmootherState s(ds, Kernel{}, 0.5, 0.05);
  EXPECT_EQ(gamma_e_hat(s).matrix.norm(), 0.0);
}

TEST(GammaE, OppositePairGivesRankOne) {
  const GridPtr g = make_uniform_grid(21);
  Curve x = Curve::sample(g, [](double t) { return 1.0 + t; });
  x.values /= norm(x);
  Matrix xs(2, 21);
  xs.row(0) = x.values.transpose();
  xs.row(1) = -x.values.transpose();
  // isolated responses and a floor below f = K(0)/(2h): r(Y_1) = x, r(Y_2) = -x
  const SmootherState s(Dataset(g, xs, Vector{{0.0, 5.0}}, true), Kernel{}, 0.5, 1e-3);
  EXPECT_LT((s.r_hat(0.0).values - x.values).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((gamma_e_hat(s).matrix - outer_product(x, x).matrix).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(GammaE, MatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Dataset ds = random_centered(20, 8, seed);
    for (const Kernel& k : {Kernel{}, kEpan}) {
      const SmootherState s(ds, k, 0.9, 0.05);
      const oracle::Kern ok = k.kind == KernelKind::quartic4 ? oracle::Kern::quartic : oracle::Kern::epan;
      EXPECT_LT(rel(gamma_e_hat(s).matrix, oracle::gamma_e(ds.xs, ds.ys, 0.9, 0.05, ok)), 1e-12);
    }
  }
}

TEST(Psi, ZeroWhenConditionalCovarianceVanishes) {
  // every window holds one point, so each C_hat(Y_i) is a point-mass covariance
  const GridPtr g = make_uniform_grid(9);
  Matrix xs(3, 9);
  for (int j = 0; j < 9; ++j) {
    const double t = g->points()[j];
    xs(0, j) = std::sin(3 * t);
    xs(1, j) = std::cos(2 * t) - 0.4;
    xs(2, j) = -xs(0, j) - xs(1, j);
  }
  const Dataset ds(g, xs, Vector{{0.0, 10.0, 20.0}}, true);
  const LinearOp gamma = empirical_covariance(ds);
  const TruncatedCov tc = truncate_and_invert(gamma, pca_basis(gamma, 2));
  const SmootherState s(ds, Kernel{}, 0.5, 1e-3);
  EXPECT_LT(psi_hat(s, tc).matrix.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Psi, PseudoInverseIdentityForSingleSummand) {
  const Fixture f = fixture(30, 10, 3, 4);
  const LinearOp cpc = compose(compose(f.tc.gamma_d, f.tc.pinv), f.tc.gamma_d);
  EXPECT_LT(rel(cpc.matrix, f.tc.gamma_d.matrix), 1e-10);
}

TEST(Psi, MatchesTripleLoopOracle) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Fixture f = fixture(15, 10, 3, seed);
    for (const Kernel& k : {Kernel{}, kEpan}) {
      const SmootherState s(f.ds, k, 1.0, 0.05);
      const oracle::Kern ok = k.kind == KernelKind::quartic4 ? oracle::Kern::quartic : oracle::Kern::epan;
      const Matrix expect = oracle::psi(f.ds.xs, f.ds.ys, 1.0, 0.05, ok, f.tc.basis.functions, f.ds.grid->weights());
      EXPECT_LT(rel(psi_hat(s, f.tc).matrix, expect), 1e-10);
    }
  }
}

TEST(CoordinateMoments, AgreeWithFullOperators) {
  const Fixture f = fixture(25, 12, 4, 7);
  const SmootherState s(f.ds, Kernel{}, 0.8, 0.05);
  const CoordinateMoments mom = coordinate_moments(s, f.tc);
  EXPECT_LT(rel(mom.gamma_e, to_coordinates(f.tc.basis, gamma_e_hat(s))), 1e-10);
  EXPECT_LT(rel(mom.psi, to_coordinates(f.tc.basis, psi_hat(s, f.tc))), 1e-10);
}

TEST(GammaI, ComposesPinvWithGhat) {
  const Fixture f = fixture(25, 12, 4, 9);
  const SmootherState s(f.ds, Kernel{}, 0.8, 0.05);
  const InterestOperator io = gamma_I_hat(s, f.tc);
  const LinearOp expect_g =
      add(add(scale(2.0, gamma_e_hat(s)), psi_hat(s, f.tc)), scale(-1.0, empirical_covariance(f.ds)));
  EXPECT_LT(rel(io.g_hat.matrix, expect_g.matrix), 1e-12);
  EXPECT_LT(rel(io.interest.matrix, compose(f.tc.pinv, io.g_hat).matrix), 1e-12);
  // synthetic G = Gamma_D gives the identity on S_D; G = 0 gives zero
  EXPECT_LT(hs_norm(add(compose(f.tc.pinv, f.tc.gamma_d), scale(-1.0, projector(f.tc.basis)))), 1e-8);
  EXPECT_EQ(hs_norm(compose(f.tc.pinv, LinearOp::zero(f.ds.grid))), 0.0);
}

TEST(Symmetry, OperatorsSymmetricAndPsd) {
  const Fixture f = fixture(40, 15, 4, 11);
  for (const Kernel& k : {Kernel{}, kEpan}) {
    const SmootherState s(f.ds, k, 0.7, 0.05);
    const CoordinateMoments mom = coordinate_moments(s, f.tc);
    EXPECT_LT((mom.gamma_e - mom.gamma_e.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((mom.psi - mom.psi.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(min_eig(mom.gamma_e), -1e-8);
    EXPECT_GE(min_eig(mom.psi), -1e-8);
    const LinearOp ge = gamma_e_hat(s), ps = psi_hat(s, f.tc);
    EXPECT_LT((ge.matrix - ge.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((ps.matrix - ps.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
  const Matrix sv = fsave_coordinates(f.ds, f.tc, 5);
  EXPECT_LT((sv - sv.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ExtractDirections, GammaDGivesUnitEigenvaluesAndFullSpan) {
  const Fixture f = fixture(40, 12, 4, 2);
  const EdrEstimate two = extract_directions(f.tc.gamma_d, f.tc, 2);
  EXPECT_NEAR(two.eigenvalues[0], 1.0, 1e-10);
  EXPECT_NEAR(two.eigenvalues[1], 1.0, 1e-10);
  const EdrEstimate all = extract_directions(f.tc.gamma_d, f.tc, 4);
  EXPECT_LT(hs_norm(add(span_projector(f.ds.grid, all.directions), scale(-1.0, projector(f.tc.basis)))), 1e-8);
}

TEST(ExtractDirections, ConstructedDiagonalCase) {
  const Fixture f = fixture(40, 12, 4, 3);
  const double lambda = 2.5;
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.tc.coords);
  const Matrix gsqrt = es.operatorSqrt();
  const Vector e1 = Vector::Unit(4, 0);
  const Matrix g = lambda * (gsqrt * e1) * (gsqrt * e1).transpose();
  const EdrEstimate est = extract_directions_coords(g, f.tc, 1);
  EXPECT_NEAR(est.eigenvalues[0], lambda, 1e-10);
  EXPECT_NEAR(std::abs(inner_product(est.direction(0), f.tc.basis.function(0))), 1.0, 1e-10);
  EXPECT_NEAR(norm(est.direction(0)), 1.0, 1e-10);
  // the same result through the operator entry point
  const EdrEstimate op = extract_directions(lift(f.tc.basis, g), f.tc, 1);
  EXPECT_LT((op.directions - est.directions).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ExtractDirections, PositiveScalingAndSignConvention) {
  const Fixture f = fixture(40, 12, 4, 5);
  const SmootherState s(f.ds, Kernel{}, 0.6, 0.05);
  const CoordinateMoments mom = coordinate_moments(s, f.tc);
  const Matrix g = 2.0 * mom.gamma_e + mom.psi - f.tc.coords;
  const EdrEstimate a = extract_directions_coords(g, f.tc, 2), b = extract_directions_coords(3.7 * g, f.tc, 2);
  EXPECT_LT((b.eigenvalues - 3.7 * a.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(proj_diff(f.ds.grid, a.directions, b.directions), 1e-8);
  EXPECT_GE(a.eigenvalues[0], a.eigenvalues[1]);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(norm(a.direction(k)), 1.0, 1e-8);
    const Vector& c = a.directions.col(k);
    for (int i = 0; i < c.size(); ++i)
      if (std::abs(c[i]) > 1e-8) {
        EXPECT_GT(c[i], 0.0);
        break;
      }
  }
}

TEST(ExtractDirections, DegenerateBlockRelabeling) {
  const Fixture f = fixture(40, 12, 4, 6);
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.tc.coords);
  const Matrix gsqrt = es.operatorSqrt();
  const Matrix diag = Vector{{3.0, 3.0, 1.0, 0.5}}.asDiagonal();
  const Matrix g = gsqrt * diag * gsqrt;
  const EdrEstimate a = extract_directions_coords(g, f.tc, 2);
  // relabel the degenerate pair: same S up to rotation inside the block
  const double th = 0.7;
  Matrix rot = Matrix::Identity(4, 4);
  rot.topLeftCorner(2, 2) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Matrix g2 = gsqrt * rot * diag * rot.transpose() * gsqrt;
  const EdrEstimate b = extract_directions_coords(g2, f.tc, 2);
  EXPECT_LT(proj_diff(f.ds.grid, a.directions, b.directions), 1e-8);
}

TEST(ExtractDirections, TooManyDirectionsIsParameterError) {
  const Fixture f = fixture(30, 10, 3, 1);
  try {
    extract_directions(f.tc.gamma_d, f.tc, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
  }
}

TEST(FaveConfig, ValidationRejectsBadValues) {
  FaveConfig c;
  EXPECT_NO_THROW(c.validate(100));
  c.K = 5;
  EXPECT_THROW(c.validate(100), Error);
  c = FaveConfig{};
  c.D = 101;
  EXPECT_THROW(c.validate(100), Error);
  c = FaveConfig{};
  c.bandwidth = -1.0;
  EXPECT_THROW(c.validate(100), Error);
  c = FaveConfig{};
  c.basis_kind = BasisKind::bspline;
  c.D = 2;
  c.K = 1;
  EXPECT_THROW(c.validate(100), Error);
}

TEST(Fsave, EqualSlicesGiveZero) {
  // two copies of the same centered cloud, one per slice
  const Dataset base = random_centered(6, 31, 13);
  Matrix xs(12, 31);
  xs << base.xs, base.xs;
  Vector y(12);
  for (int i = 0; i < 12; ++i) y[i] = i < 6 ? i : 100 + i;
  const Dataset ds(base.grid, xs, y, true);
  const LinearOp gamma = empirical_covariance(ds);
  const TruncatedCov tc = truncate_and_invert(gamma, pca_basis(gamma, 3));
  EXPECT_LT(fsave_coordinates(ds, tc, 2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fsave, HandComputedTwoSliceToy) {
  const GridPtr g = make_uniform_grid(41);
  Matrix phi(41, 2);
  for (int j = 0; j < 41; ++j) {
    const double t = g->points()[j];
    phi(j, 0) = std::sqrt(2.0) * std::sin(2 * std::numbers::pi * t);
    phi(j, 1) = std::sqrt(2.0) * std::sin(4 * std::numbers::pi * t);
  }
  const Basis basis(g, phi, BasisKind::bspline);
  const double a[6] = {2, -1, 0, 1, -3, 1}, b[6] = {1, 1, -2, 0, 1, -1};
  Matrix xs(6, 41);
  for (int i = 0; i < 6; ++i) xs.row(i) = (a[i] * phi.col(0) + b[i] * phi.col(1)).transpose();
  const Dataset ds(g, xs, Vector::LinSpaced(6, 1.0, 6.0), true);
  const TruncatedCov tc = truncate_and_invert(empirical_covariance(ds), basis);
  Matrix G(2, 2), expect(2, 2);
  G << 8.0 / 3, -0.5, -0.5, 4.0 / 3;
  expect << 2302.0 / 3213, 83.0 / 714, 83.0 / 714, 96.0 / 119;
  EXPECT_LT((tc.coords - G).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((fsave_coordinates(ds, tc, 2) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fsave, SlicingErrors) {
  const Dataset ds = random_centered(9, 6, 1);
  try {
    equal_count_slices(ds.ys, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::slicing);
  }
  EXPECT_THROW(equal_count_slices(ds.ys, 1), Error);
  const auto s = equal_count_slices(ds.ys, 4);
  EXPECT_EQ(s[0].size(), 3u);
  EXPECT_EQ(s[3].size(), 2u);
  // every slice's responses lie below the next slice's
  for (std::size_t h = 0; h + 1 < s.size(); ++h)
    for (int i : s[h])
      for (int j : s[h + 1]) EXPECT_LT(ds.ys[i], ds.ys[j]);
  try {
    fsave_sliced(ds, 3, 1, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::slicing);
    EXPECT_EQ(e.stage(), "slicing");
  }
}

TEST(Pipeline, ModelOneDistanceBelowMaximum) {
  const GridPtr g = make_uniform_grid(100);
  const ModelSpec model = ModelSpec::make(ModelId::model1, g);
  const LinearOp truth = span_projector({model.betas[0], model.betas[1]});
  int below = 0;
  for (int r = 0; r < 100; ++r) {
    const EdrEstimate est = fave(generate(model, g, 100, replication_seed(7, r)), FaveConfig{});
    if (subspace_distance(truth, span_projector(g, est.directions)) < 2.0 - 1e-9) ++below;
  }
  EXPECT_GE(below, 95);
}

TEST(Pipeline, NullResponseHasSmallerLeadingEigenvalue) {
  const GridPtr g = make_uniform_grid(100);
  const ModelSpec model = ModelSpec::make(ModelId::model1, g);
  std::vector<double> null_fave, null_fsir, model_fave;
  for (int r = 0; r < 50; ++r) {
    Dataset noise(g, brownian_paths(*g, 100, 500 + r), Vector::Zero(100));
    std::mt19937_64 rng(900 + r);
    std::normal_distribution<double> nd;
    for (auto& v : noise.ys) v = nd(rng);
    null_fave.push_back(fave(noise, FaveConfig{}).eigenvalues[0]);
    null_fsir.push_back(fsir(noise, FaveConfig{}).eigenvalues[0]);
    model_fave.push_back(fave(generate(model, g, 100, 700 + r), FaveConfig{}).eigenvalues[0]);
  }
  EXPECT_LT(oracle::median(null_fave), oracle::median(model_fave));
  EXPECT_LT(oracle::median(null_fsir), 0.15);
}

TEST(Pipeline, FsirMissesSymmetricLinkThatFaveSees) {
  const GridPtr g = make_uniform_grid(100);
  const Curve beta = ModelSpec::make(ModelId::model1, g).betas[0];
  std::vector<double> lf, ls;
  for (int r = 0; r < 30; ++r) {
    Dataset ds(g, brownian_paths(*g, 100, 40 + r), Vector::Zero(100));
    std::mt19937_64 rng(60 + r);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 100; ++i) ds.ys[i] = std::pow(index_of(ds.curve(i), beta), 2) + 0.01 * nd(rng);
    lf.push_back(fave(ds, FaveConfig{}).eigenvalues[0]);
    ls.push_back(fsir(ds, FaveConfig{}).eigenvalues[0]);
  }
  EXPECT_LT(oracle::median(ls), 0.15);
  EXPECT_GT(oracle::median(lf), 2.0 * oracle::median(ls));
}

TEST(Pipeline, FsirRecoversLinearIndex) {
  const GridPtr g = make_uniform_grid(100);
  const Curve beta = ModelSpec::make(ModelId::model1, g).betas[0];
  FaveConfig cfg;
  cfg.K = 1;
  std::vector<double> cos;
  for (int r = 0; r < 50; ++r) {
    Dataset ds(g, brownian_paths(*g, 400, 3000 + r), Vector::Zero(400));
    std::mt19937_64 rng(5000 + r);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 400; ++i) ds.ys[i] = index_of(ds.curve(i), beta) + 0.1 * nd(rng);
    const EdrEstimate est = fsir(ds, cfg);
    cos.push_back(std::abs(inner_product(est.direction(0), beta)) / norm(beta));
  }
  EXPECT_GE(oracle::median(cos), 0.9);
}

TEST(Pipeline, ModelTwoFsaveBeatsFsir) {
  const GridPtr g = make_uniform_grid(100);
  const ModelSpec model = ModelSpec::make(ModelId::model2, g);
  const LinearOp truth = span_projector({model.betas[0], model.betas[1]});
  std::vector<double> save, sir;
  for (int r = 0; r < 100; ++r) {
    const Dataset ds = generate(model, g, 100, replication_seed(1, r));
    save.push_back(subspace_distance(truth, span_projector(g, fsave_sliced(ds, 4, 2, 10).directions)));
    sir.push_back(subspace_distance(truth, span_projector(g, fsir(ds, FaveConfig{}).directions)));
  }
  EXPECT_LT(oracle::median(save), oracle::median(sir));
}

TEST(Pipeline, PredictorScaleInvariance) {
  const GridPtr g = make_uniform_grid(100);
  const Dataset ds = generate(ModelSpec::make(ModelId::model1, g), g, 100, 5);
  Dataset scaled = ds;
  scaled.xs *= 7.3;
  FaveConfig cfg;
  cfg.clipping_floor = 1e-12;
  for (Method m : {Method::fave, Method::fsir}) {
    const EdrEstimate a = estimate(m, ds, cfg), b = estimate(m, scaled, cfg);
    EXPECT_LT(proj_diff(g, a.directions, b.directions), 1e-6) << to_string(m);
  }
  const EdrEstimate a = fsave_sliced(ds, 4, 2, 10), b = fsave_sliced(scaled, 4, 2, 10);
  EXPECT_LT(proj_diff(g, a.directions, b.directions), 1e-6);
}

TEST(Pipeline, DeterministicAndDiagnostics) {
  const GridPtr g = make_uniform_grid(100);
  const Dataset ds = generate(ModelSpec::make(ModelId::model2, g), g, 100, 3);
  for (Method m : {Method::fave, Method::fsir, Method::fsave}) {
    const EdrEstimate a = estimate(m, ds, FaveConfig{}), b = estimate(m, ds, FaveConfig{});
    EXPECT_EQ(a.directions, b.directions);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
    EXPECT_EQ(a.diagnostics, b.diagnostics);
    EXPECT_EQ(a.method, m);
    EXPECT_EQ(a.K(), 2);
    EXPECT_GE(a.eigenvalues[0], a.eigenvalues[1]);
    EXPECT_EQ(a.diagnostics.at("D"), 4.0);
    EXPECT_GT(a.t_d, 0.0);
  }
  const EdrEstimate f = fave(ds, FaveConfig{});
  EXPECT_GT(f.diagnostics.at("h"), 0.0);
  EXPECT_DOUBLE_EQ(f.diagnostics.at("e_n"), 0.05);
}

TEST(Pipeline, StageTagOnRankFailure) {
  const Dataset ds = random_centered(3, 10, 2);
  try {
    fave(ds, FaveConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.is_numerical());
    EXPECT_FALSE(e.stage().empty());
  }
}
