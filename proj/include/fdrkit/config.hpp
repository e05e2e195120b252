#pragma once

// Flat `key = value` run configuration shared by the CLI commands.
//
// Keys are the long flag names (model, method, basis, dim, ndirs, slices,
// bandwidth, plots, threads, seed, out) plus the settings that have no flag
// (n, m, p, noise_sd, kernel, a_cap, c2, e_n, ridge, transform,
// bandwidth_grid, input). List-valued keys take comma-separated values.
// Lines starting with '#' are comments. Unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdrkit/basis.hpp"
#include "fdrkit/edr.hpp"
#include "fdrkit/kernel_smoothing.hpp"
#include "fdrkit/sim_bench.hpp"

namespace fdrkit {

struct RunConfig {
  std::string out = "fdrkit_out";
  std::uint64_t seed = 1;
  // empty lists mean "the command's default"
  std::vector<ModelId> models;
  std::vector<Method> methods;
  std::vector<BasisKind> bases;
  std::vector<int> dims;
  int ndirs = 2;
  std::optional<int> slices;
  std::optional<double> bandwidth;  // unset: cross-validation
  std::vector<double> bandwidth_grid;
  KernelKind kernel = KernelKind::quartic4;
  double a_cap = 0.05;
  std::optional<double> c2;   // unset: default for the kernel order
  std::optional<double> e_n;  // fixed floor, overrides a_cap and c2
  double ridge = kDefaultRidge;
  ResponseTransform transform = ResponseTransform::rank;
  int n = 100;
  int m = 100;
  int p = 100;
  double noise_sd = 0.1;
  bool plots = true;
  std::optional<int> threads;  // unset: FDRKIT_THREADS, then 1
  std::string input;

  bool operator==(const RunConfig&) const = default;

  /// Set one key from its text value; validation error naming the key on an
  /// unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);

  /// Apply every `key = value` line of `text` on top of the current values.
  void merge_text(const std::string& text, const std::string& source);

  static RunConfig parse(const std::string& text, const std::string& source = "<config>");
  static RunConfig load(const std::string& path);

  /// Every key that differs from "unset", one per line, in a fixed order.
  std::string serialize() const;

  /// Range checks that do not depend on the command.
  void validate() const;

  FaveConfig estimator(int D, BasisKind basis) const;
  int resolved_threads() const;
};

/// The accepted keys, in serialization order.
const std::vector<std::string>& config_keys();

}  // namespace fdrkit
