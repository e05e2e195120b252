#include "fdrkit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdrkit/error.hpp"
#include "json.hpp"

namespace fdrkit::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t row, std::size_t col, const std::string& what) {
  std::string msg = source + ": row " + std::to_string(row);
  if (col > 0) msg += ", column " + std::to_string(col);
  throw Error(ErrorKind::parse, msg + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

double cell_real(const CsvTable& t, const std::string& source, std::size_t r, std::size_t c) {
  const auto v = parse_real(t.rows[r][c]);
  if (!v) parse_fail(source, r + 2, c + 1, "'" + t.rows[r][c] + "' is not a number");
  return *v;
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::optional<double> parse_real(const std::string& field) {
  if (field.empty()) return std::nullopt;
  const char* first = field.data();
  const char* last = first + field.size();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  throw Error(ErrorKind::parse, "missing column '" + name + "'");
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      parse_fail(source, row, std::min(cells.size(), t.header.size()) + 1,
                 "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw Error(ErrorKind::parse, source + ": empty file");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_csv(in, path.string());
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  out << "y";
  for (int j = 0; j < ds.p(); ++j) out << ",t_" << j;
  out << '\n';
  for (int k = 0; k < ds.n(); ++k) {
    out << format_real(ds.ys[k]);
    for (int j = 0; j < ds.p(); ++j) out << ',' << format_real(ds.xs(k, j));
    out << '\n';
  }
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ostringstream os;
  write_dataset_csv(ds, os);
  write_file(path, os.str());
}

Dataset read_dataset_csv(std::istream& in, const std::string& source, GridPtr grid) {
  // The header is checked before the body so that a wrong file type is
  // reported as such rather than as a numeric error somewhere inside it.
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) header = split_line(line);
  }
  if (header.empty()) throw Error(ErrorKind::parse, source + ": empty file");
  if (header[0] != "y") parse_fail(source, row, 1, "first column must be 'y', found '" + header[0] + "'");
  const std::size_t p = header.size() - 1;
  if (p < 2) parse_fail(source, row, 0, "need at least two curve columns");
  for (std::size_t j = 0; j < p; ++j)
    if (header[j + 1] != "t_" + std::to_string(j))
      parse_fail(source, row, j + 2, "expected 't_" + std::to_string(j) + "', found '" + header[j + 1] + "'");

  std::vector<double> ys;
  std::vector<double> xs;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != p + 1)
      parse_fail(source, row, std::min(cells.size(), p + 1) + 1,
                 "expected " + std::to_string(p + 1) + " fields, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_real(cells[c]);
      if (!v) parse_fail(source, row, c + 1, "'" + cells[c] + "' is not a number");
      if (!std::isfinite(*v)) parse_fail(source, row, c + 1, "non-finite value");
      (c == 0 ? ys : xs).push_back(*v);
    }
  }
  if (ys.size() < 2) throw Error(ErrorKind::parse, source + ": need at least two data rows");

  if (!grid) grid = make_uniform_grid(static_cast<int>(p));
  if (grid->size() != static_cast<int>(p))
    throw Error(ErrorKind::dimension, source + ": file has " + std::to_string(p) + " curve columns but the grid has " +
                                          std::to_string(grid->size()) + " points");
  const auto n = static_cast<Eigen::Index>(ys.size());
  Matrix x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, static_cast<Eigen::Index>(p));
  Vector y = Eigen::Map<const Vector>(ys.data(), n);
  return Dataset(std::move(grid), std::move(x), std::move(y), false);
}

Dataset read_dataset_csv(const std::filesystem::path& path, GridPtr grid) {
  auto in = open_input(path);
  return read_dataset_csv(in, path.string(), std::move(grid));
}

void write_basis_csv(const Basis& basis, std::ostream& out) {
  out << 't';
  for (int j = 0; j < basis.dim(); ++j) out << ",phi_" << j + 1;
  out << '\n';
  const Vector& t = basis.grid->points();
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    out << format_real(t[i]);
    for (int j = 0; j < basis.dim(); ++j) out << ',' << format_real(basis.functions(i, j));
    out << '\n';
  }
}

void write_estimate_csv(const EdrEstimate& est, std::ostream& out) {
  out << 't';
  for (int k = 0; k < est.K(); ++k) out << ",beta_" << k + 1;
  out << '\n';
  const Vector& t = est.grid->points();
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    out << format_real(t[i]);
    for (int k = 0; k < est.K(); ++k) out << ',' << format_real(est.directions(i, k));
    out << '\n';
  }
}

std::string estimate_json(const EdrEstimate& est, const std::map<std::string, std::string>& meta) {
  json j;
  j["method"] = to_string(est.method);
  j["eigenvalues"] = std::vector<double>(est.eigenvalues.data(), est.eigenvalues.data() + est.eigenvalues.size());
  j["t_d"] = est.t_d;
  j["diagnostics"] = est.diagnostics;
  if (!meta.empty()) j["meta"] = meta;
  return j.dump(2) + "\n";
}

EdrEstimate read_estimate(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
  const std::string source = csv_path.string();
  const CsvTable t = read_csv(csv_path);
  if (t.header.empty() || t.header[0] != "t") parse_fail(source, 1, 1, "first column must be 't'");
  const std::size_t K = t.header.size() - 1;
  for (std::size_t k = 0; k < K; ++k)
    if (t.header[k + 1] != "beta_" + std::to_string(k + 1))
      parse_fail(source, 1, k + 2, "expected 'beta_" + std::to_string(k + 1) + "'");
  const std::size_t p = t.rows.size();
  std::vector<double> points(p);
  Matrix dirs(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(K));
  for (std::size_t r = 0; r < p; ++r) {
    points[r] = cell_real(t, source, r, 0);
    for (std::size_t k = 0; k < K; ++k)
      dirs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = cell_real(t, source, r, k + 1);
  }

  auto in = open_input(json_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, json_path.string() + ": " + e.what());
  }
  EdrEstimate est;
  try {
    est.grid = std::make_shared<const Grid>(Grid::from_points(points));
    est.directions = std::move(dirs);
    const auto eig = j.at("eigenvalues").get<std::vector<double>>();
    if (eig.size() != K) throw Error(ErrorKind::parse, json_path.string() + ": eigenvalue count does not match the CSV");
    est.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Eigen::Index>(eig.size()));
    est.t_d = j.at("t_d").get<double>();
    est.method = parse_method(j.at("method").get<std::string>());
    est.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, json_path.string() + ": " + e.what());
  }
  return est;
}

void write_bench_long_csv(const std::vector<BenchResult>& results, std::ostream& out) {
  out << "model,method,basis,D,replication,distance\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.distances.size(); ++i) {
      out << to_string(r.model) << ',' << to_string(r.method) << ',' << to_string(r.basis_kind) << ',' << r.D << ','
          << i << ',';
      if (r.distances[i]) out << format_real(*r.distances[i]);
      out << '\n';
    }
  }
}

void write_bench_summary_csv(const std::vector<BenchResult>& results, std::ostream& out) {
  out << "model,method,basis,D,n,m,successes,failures,min,q1,median,q3,max\n";
  for (const auto& r : results) {
    const int m = static_cast<int>(r.distances.size());
    out << to_string(r.model) << ',' << to_string(r.method) << ',' << to_string(r.basis_kind) << ',' << r.D << ','
        << r.n << ',' << m << ',' << m - r.failures << ',' << r.failures;
    const FiveNumber& f = r.five_number;
    for (double v : {f.min, f.q1, f.median, f.q3, f.max}) {
      out << ',';
      if (std::isfinite(v)) out << format_real(v);
    }
    out << '\n';
  }
}

std::vector<BenchRecord> read_bench_long_csv(std::istream& in, const std::string& source) {
  const CsvTable t = read_csv(in, source);
  const std::vector<std::string> expected{"model", "method", "basis", "D", "replication", "distance"};
  if (t.header != expected) parse_fail(source, 1, 0, "not a long-format benchmark file");
  std::vector<BenchRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& c = t.rows[r];
    auto field = [&](std::size_t col, auto&& parse) {
      try {
        return parse(c[col]);
      } catch (const Error& e) {
        parse_fail(source, r + 2, col + 1, e.what());
      }
    };
    auto integer = [&](std::size_t col) {
      const auto v = parse_real(c[col]);
      if (!v || *v != std::floor(*v)) parse_fail(source, r + 2, col + 1, "'" + c[col] + "' is not an integer");
      return static_cast<int>(*v);
    };
    BenchRecord rec{field(0, parse_model), field(1, parse_method), field(2, parse_basis_kind), integer(3), integer(4),
                    std::nullopt};
    if (!c[5].empty()) {
      const auto v = parse_real(c[5]);
      if (!v) parse_fail(source, r + 2, 6, "'" + c[5] + "' is not a number");
      rec.distance = *v;
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<BenchRecord> read_bench_long_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_bench_long_csv(in, path.string());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorKind::io, "cannot create directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

}  // namespace fdrkit::io
