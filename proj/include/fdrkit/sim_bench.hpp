#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdrkit/edr.hpp"
#include "fdrkit/fda_core.hpp"

namespace fdrkit {

enum class ModelId { model1, model2 };

const char* to_string(ModelId id);
ModelId parse_model(const std::string& s);

/// Simulation model with two index directions.
///
///   model1: Y = sin(pi <b1,X> / 2) + <b2,X>^5 + eps,
///           b1(t) = (2t-1)^3 + 1, b2(t) = cos(pi(2t-1)) + 1
///   model2: Y = 50 <b1,X>^2 + <b2,X>^2 + eps,
///           b1(t) = 4t^2, b2(t) = sin(5 pi t / 2)
///
/// with eps ~ N(0, noise_sd^2).
struct ModelSpec {
  ModelId id;
  std::array<Curve, 2> betas;
  double noise_sd = 0.1;

  static ModelSpec make(ModelId id, const GridPtr& grid, double noise_sd = 0.1);

  /// Noise-free link evaluated at the two indices.
  double link(double index1, double index2) const;
};

/// Standard Brownian paths on a uniform grid: X(0) = 0 and independent
/// N(0, dt) increments. Row k is path k.
Matrix brownian_paths(const Grid& grid, int n, std::uint64_t seed);

/// n draws from the model; the dataset is returned uncentered.
Dataset generate(const ModelSpec& model, const GridPtr& grid, int n, std::uint64_t seed);

/// Orthogonal projector onto span(betas); Gram-Schmidt in the <.,.> metric.
LinearOp span_projector(const std::vector<Curve>& betas);
LinearOp span_projector(const GridPtr& grid, const Matrix& columns);

/// ||P_true - P_est||_hs for two orthogonal projectors.
double subspace_distance(const LinearOp& p_true, const LinearOp& p_est);

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Quartiles by linear interpolation between order statistics (R type 7).
FiveNumber five_number_summary(std::vector<double> values);

/// Seed of replication r under master seed s: s * 10^6 + r.
std::uint64_t replication_seed(std::uint64_t master, int replication);

struct BenchSpec {
  ModelId model = ModelId::model1;
  std::vector<Method> methods{Method::fave, Method::fsir, Method::fsave};
  std::vector<BasisKind> basis_kinds{BasisKind::pca, BasisKind::bspline};
  std::vector<int> dims{4, 5, 6, 7, 8};
  int n = 100;
  int m = 100;
  int p = 100;
  std::uint64_t seed = 1;
  double noise_sd = 0.1;
  FaveConfig estimator{};  // D, basis_kind and method are overridden per scenario
  int threads = 1;
};

struct BenchResult {
  ModelId model;
  Method method;
  BasisKind basis_kind;
  int D;
  int n;
  std::uint64_t seed;
  std::vector<std::optional<double>> distances;  // one entry per replication; empty on failure
  FiveNumber five_number;                        // over successful replications
  int failures = 0;

  std::vector<double> successes() const;
};

/// Every (method, basis, D) scenario over m replications. Replication r uses
/// one dataset, drawn with replication_seed(seed, r), for all scenarios.
/// Numerical failures are recorded per replication; results do not depend on
/// the thread count.
std::vector<BenchResult> run_benchmark(const BenchSpec& spec);

}  // namespace fdrkit
