#pragma once

// CSV and JSON readers/writers. Every real number is written with 17
// significant digits, so write-then-read reproduces the stored doubles bit for
// bit.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdrkit/basis.hpp"
#include "fdrkit/edr.hpp"
#include "fdrkit/fda_core.hpp"
#include "fdrkit/sim_bench.hpp"

namespace fdrkit::io {

std::string format_real(double x);

/// Strict parse of a complete field; nullopt when it is not a number.
std::optional<double> parse_real(const std::string& field);

/// A CSV file split into a header and string cells. Quoting is not supported;
/// none of the formats here needs it.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or a parse error naming it.
  std::size_t column(const std::string& name) const;
};

/// `source` names the input in parse errors ("<source>: row R, column C: ...").
/// Rows are numbered from 1 at the header line.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

/// Header `y,t_0,...,t_{p-1}`, one observation per row.
void write_dataset_csv(const Dataset& ds, std::ostream& out);
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

/// Without a grid, the p curve columns are taken to sit on the uniform grid
/// of p points.
Dataset read_dataset_csv(std::istream& in, const std::string& source, GridPtr grid = nullptr);
Dataset read_dataset_csv(const std::filesystem::path& path, GridPtr grid = nullptr);

/// Columns t, phi_1..phi_D.
void write_basis_csv(const Basis& basis, std::ostream& out);

/// Columns t, beta_1..beta_K.
void write_estimate_csv(const EdrEstimate& est, std::ostream& out);

/// Sidecar with method, eigenvalues, t_d and diagnostics, plus free-form
/// string metadata.
std::string estimate_json(const EdrEstimate& est, const std::map<std::string, std::string>& meta = {});

/// Rebuild an estimate from its CSV and JSON sidecar.
EdrEstimate read_estimate(const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

/// One row per replication: model,method,basis,D,replication,distance. Failed
/// replications have an empty distance field.
void write_bench_long_csv(const std::vector<BenchResult>& results, std::ostream& out);

/// One row per scenario with the five-number summary and the failure count.
void write_bench_summary_csv(const std::vector<BenchResult>& results, std::ostream& out);

/// A parsed long-format row.
struct BenchRecord {
  ModelId model;
  Method method;
  BasisKind basis;
  int D;
  int replication;
  std::optional<double> distance;
};

std::vector<BenchRecord> read_bench_long_csv(std::istream& in, const std::string& source);
std::vector<BenchRecord> read_bench_long_csv(const std::filesystem::path& path);

/// Write `content` to `path`, throwing an io error that names the path.
void write_file(const std::filesystem::path& path, const std::string& content);

/// Create `dir` and its parents if needed.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace fdrkit::io
