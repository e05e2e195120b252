#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdrkit/config.hpp"
#include "fdrkit/error.hpp"
#include "fdrkit/io.hpp"

namespace fdrkit {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // failing selftest check or an unexpected internal error
  kExitValidation = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

int exit_code_for(const Error& e);

/// Writes dataset.csv and manifest.json under cfg.out.
void cmd_simulate(const RunConfig& cfg, std::ostream& log);

/// Estimates from the dataset at cfg.input and writes estimate.csv,
/// estimate.json and, with plots enabled, directions.svg. When a model is set
/// the truth is overlaid and index_scatter.csv/.svg are written as well.
void cmd_estimate(const RunConfig& cfg, std::ostream& log);

/// Runs the scenario grid and writes bench_long.csv, bench_summary.csv and
/// one boxplot SVG per (model, basis). Returns kExitNumerical when no
/// replication of any scenario succeeded.
int cmd_benchmark(const RunConfig& cfg, std::ostream& log);

/// Boxplot SVGs from a long-format benchmark CSV at cfg.input.
void cmd_plot(const RunConfig& cfg, std::ostream& log);

/// One SVG per (model, basis) present in `records`; returns the paths written.
std::vector<std::filesystem::path> write_boxplots(const std::vector<io::BenchRecord>& records,
                                                  const std::filesystem::path& dir);

/// Full command line without the program name, e.g. {"simulate", "--seed", "7"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdrkit
