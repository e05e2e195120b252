#include "fdrkit/commands.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fdrkit/edr.hpp"
#include "fdrkit/selftest.hpp"
#include "fdrkit/sim_bench.hpp"
#include "fdrkit/svg.hpp"
#include "json.hpp"

namespace fdrkit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::validation, "config key '" + key + "': " + why);
}

template <class T>
T single(const std::vector<T>& xs, T fallback, const char* key, const char* command) {
  if (xs.empty()) return fallback;
  if (xs.size() > 1) invalid(key, std::string(command) + " takes a single value");
  return xs.front();
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<io::BenchRecord> to_records(const std::vector<BenchResult>& results) {
  std::vector<io::BenchRecord> out;
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.distances.size(); ++i)
      out.push_back({r.model, r.method, r.basis_kind, r.D, static_cast<int>(i), r.distances[i]});
  return out;
}

template <class T>
void push_unique(std::vector<T>& xs, const T& x) {
  if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::io:
    case ErrorKind::parse:
      return kExitIo;
    case ErrorKind::rank:
    case ErrorKind::singularity:
    case ErrorKind::slicing:
      return kExitNumerical;
    default:
      return kExitValidation;
  }
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const ModelId model = single(cfg.models, ModelId::model1, "model", "simulate");
  const GridPtr grid = make_uniform_grid(cfg.p);
  const Dataset ds = generate(ModelSpec::make(model, grid, cfg.noise_sd), grid, cfg.n, cfg.seed);

  const fs::path dir(cfg.out);
  io::ensure_directory(dir);
  io::write_dataset_csv(ds, dir / "dataset.csv");

  json manifest;
  manifest["model"] = to_string(model);
  manifest["seed"] = cfg.seed;
  manifest["n"] = cfg.n;
  manifest["noise_sd"] = cfg.noise_sd;
  manifest["grid"] = {{"kind", "uniform"}, {"p", cfg.p}, {"points", to_std(grid->points())}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << (dir / "dataset.csv").string() << " (" << ds.n() << " rows, " << ds.p() + 1 << " columns)\n";
}

void cmd_estimate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.input.empty()) invalid("input", "estimate needs a dataset path");
  const Method method = single(cfg.methods, Method::fave, "method", "estimate");
  const BasisKind basis = single(cfg.bases, BasisKind::pca, "basis", "estimate");
  const int D = single(cfg.dims, 4, "dim", "estimate");
  if (method == Method::fsave && !cfg.slices) invalid("slices", "required for method fsave (number of slices H)");
  std::optional<ModelId> model;
  if (!cfg.models.empty()) model = single(cfg.models, ModelId::model1, "model", "estimate");

  const Dataset ds = io::read_dataset_csv(fs::path(cfg.input));
  const EdrEstimate est = estimate(method, ds, cfg.estimator(D, basis));

  const fs::path dir(cfg.out);
  io::ensure_directory(dir);
  {
    std::ostringstream os;
    io::write_estimate_csv(est, os);
    io::write_file(dir / "estimate.csv", os.str());
  }
  const std::map<std::string, std::string> meta{{"input", cfg.input},
                                                {"basis", to_string(basis)},
                                                {"kernel", to_string(cfg.kernel)},
                                                {"transform", to_string(cfg.transform)}};
  io::write_file(dir / "estimate.json", io::estimate_json(est, meta));

  log << to_string(method) << " eigenvalues:";
  for (Eigen::Index k = 0; k < est.eigenvalues.size(); ++k) log << ' ' << io::format_real(est.eigenvalues[k]);
  log << "\nwrote " << (dir / "estimate.csv").string() << " and " << (dir / "estimate.json").string() << '\n';

  if (!cfg.plots) return;
  const std::vector<double> t = to_std(ds.grid->points());
  std::vector<svg::LineSeries> lines;
  std::vector<Curve> truth;
  if (model) {
    const ModelSpec spec = ModelSpec::make(*model, ds.grid);
    for (const Curve& b : spec.betas) truth.emplace_back(ds.grid, b.values / norm(b));
  }
  for (int k = 0; k < est.K(); ++k) {
    Curve b = est.direction(k);
    // directions are defined up to sign; match the truth for display only
    if (k < static_cast<int>(truth.size()) && inner_product(b, truth[k]) < 0) b.values = -b.values;
    lines.push_back({"estimated beta_" + std::to_string(k + 1), t, to_std(b.values), false, k});
  }
  for (std::size_t k = 0; k < truth.size(); ++k)
    lines.push_back({"true beta_" + std::to_string(k + 1), t, to_std(truth[k].values), true, static_cast<int>(k)});
  io::write_file(dir / "directions.svg",
                 svg::line_plot(lines, std::string(to_string(method)) + " directions, D = " + std::to_string(D), "t",
                                "normalized direction"));

  if (!model) return;
  const Vector& w = ds.grid->weights();
  const Matrix est_index = ds.xs * w.asDiagonal() * est.directions;  // n x K
  Matrix true_index(ds.n(), static_cast<Eigen::Index>(truth.size()));
  for (std::size_t j = 0; j < truth.size(); ++j)
    true_index.col(static_cast<Eigen::Index>(j)) = ds.xs * w.asDiagonal() * truth[j].values;
  std::ostringstream os;
  os << "i,y";
  for (int k = 0; k < est.K(); ++k) os << ",est_index_" << k + 1;
  for (std::size_t j = 0; j < truth.size(); ++j) os << ",true_index_" << j + 1;
  os << '\n';
  for (int i = 0; i < ds.n(); ++i) {
    os << i << ',' << io::format_real(ds.ys[i]);
    for (int k = 0; k < est.K(); ++k) os << ',' << io::format_real(est_index(i, k));
    for (Eigen::Index j = 0; j < true_index.cols(); ++j) os << ',' << io::format_real(true_index(i, j));
    os << '\n';
  }
  io::write_file(dir / "index_scatter.csv", os.str());

  std::vector<svg::ScatterSeries> pts;
  for (int k = 0; k < std::min<int>(est.K(), static_cast<int>(truth.size())); ++k)
    pts.push_back({"index " + std::to_string(k + 1), to_std(true_index.col(k)), to_std(est_index.col(k))});
  io::write_file(dir / "index_scatter.svg",
                 svg::scatter_plot(pts, "estimated vs true indices", "<beta_j, X_i>", "<beta_hat_j, X_i>"));
}

std::vector<fs::path> write_boxplots(const std::vector<io::BenchRecord>& records, const fs::path& dir) {
  std::vector<std::pair<ModelId, BasisKind>> panels;
  for (const auto& r : records) push_unique(panels, std::make_pair(r.model, r.basis));

  std::vector<fs::path> written;
  for (const auto& [model, basis] : panels) {
    std::vector<int> dims;
    std::vector<Method> methods;
    for (const auto& r : records)
      if (r.model == model && r.basis == basis) {
        push_unique(dims, r.D);
        push_unique(methods, r.method);
      }
    std::sort(dims.begin(), dims.end());
    std::vector<svg::BoxGroup> groups;
    for (int D : dims) {
      svg::BoxGroup g{"D = " + std::to_string(D), {}};
      for (Method m : methods) {
        svg::BoxSeries box{to_string(m), {}};
        for (const auto& r : records)
          if (r.model == model && r.basis == basis && r.D == D && r.method == m && r.distance)
            box.values.push_back(*r.distance);
        g.boxes.push_back(std::move(box));
      }
      groups.push_back(std::move(g));
    }
    const fs::path path = dir / (std::string("boxplot_") + to_string(model) + "_" + to_string(basis) + ".svg");
    io::write_file(path, svg::grouped_boxplot(groups, std::string(to_string(model)) + ", " + to_string(basis) + " basis",
                                              "truncation dimension", "||P - P_hat||_hs"));
    written.push_back(path);
  }
  return written;
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& log) {
  BenchSpec base;
  if (!cfg.methods.empty()) base.methods = cfg.methods;
  if (!cfg.bases.empty()) base.basis_kinds = cfg.bases;
  if (!cfg.dims.empty()) base.dims = cfg.dims;
  base.n = cfg.n;
  base.m = cfg.m;
  base.p = cfg.p;
  base.seed = cfg.seed;
  base.noise_sd = cfg.noise_sd;
  base.estimator = cfg.estimator(base.dims.front(), base.basis_kinds.front());
  base.threads = cfg.resolved_threads();
  const std::vector<ModelId> models = cfg.models.empty() ? std::vector{ModelId::model1, ModelId::model2} : cfg.models;

  std::vector<BenchResult> results;
  for (ModelId model : models) {
    BenchSpec spec = base;
    spec.model = model;
    auto part = run_benchmark(spec);
    results.insert(results.end(), part.begin(), part.end());
  }

  const fs::path dir(cfg.out);
  io::ensure_directory(dir);
  std::ostringstream lng, summary;
  io::write_bench_long_csv(results, lng);
  io::write_bench_summary_csv(results, summary);
  io::write_file(dir / "bench_long.csv", lng.str());
  io::write_file(dir / "bench_summary.csv", summary.str());

  std::size_t successes = 0;
  char line[160];
  for (const auto& r : results) {
    successes += r.successes().size();
    std::snprintf(line, sizeof line, "%-7s %-6s %-8s D=%d  median %.4f  failures %d/%zu\n", to_string(r.model),
                  to_string(r.method), to_string(r.basis_kind), r.D, r.five_number.median, r.failures,
                  r.distances.size());
    log << line;
  }
  log << "wrote " << (dir / "bench_long.csv").string() << " and " << (dir / "bench_summary.csv").string() << '\n';
  if (cfg.plots)
    for (const auto& p : write_boxplots(to_records(results), dir)) log << "wrote " << p.string() << '\n';

  if (successes == 0) {
    log << "every replication failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

void cmd_plot(const RunConfig& cfg, std::ostream& log) {
  if (cfg.input.empty()) invalid("input", "plot needs a long-format benchmark CSV");
  const auto records = io::read_bench_long_csv(fs::path(cfg.input));
  const fs::path dir(cfg.out);
  io::ensure_directory(dir);
  for (const auto& p : write_boxplots(records, dir)) log << "wrote " << p.string() << '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Functional dimension reduction: kernel FAVE with FSIR and FSAVE baselines", "fdrkit"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> given;
    double corrupt_kernel = 1.0;
  } flags;

  const std::vector<std::pair<std::string, std::string>> flag_help{
      {"out", "output directory"},
      {"seed", "master seed"},
      {"model", "model1 or model2 (comma list for benchmark)"},
      {"method", "fave, fsir or fsave (comma list for benchmark)"},
      {"basis", "pca or bspline (comma list for benchmark)"},
      {"dim", "truncation dimension D (comma list for benchmark)"},
      {"ndirs", "number of directions K"},
      {"slices", "number of FSAVE slices H"},
      {"bandwidth", "kernel bandwidth, or cv for cross-validation"},
      {"plots", "write SVG figures (true/false)"},
      {"threads", "worker threads for benchmark (default: FDRKIT_THREADS or 1)"},
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "key = value configuration file");
    for (const auto& [key, help] : flag_help)
      flags.given.emplace_back(key, sub->add_option("--" + key, flags.values[key], help));
    sub->add_option("--set", flags.sets, "KEY=VALUE override for any configuration key");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "simulate a dataset from model1 or model2");
  CLI::App* estimate_cmd = app.add_subcommand("estimate", "estimate EDR directions from a dataset CSV");
  CLI::App* benchmark = app.add_subcommand("benchmark", "Monte Carlo comparison over a scenario grid");
  CLI::App* plot = app.add_subcommand("plot", "boxplot SVGs from a long-format benchmark CSV");
  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle and invariant checks");
  for (CLI::App* sub : {simulate, estimate_cmd, benchmark, plot}) add_common(sub);
  std::string input;
  estimate_cmd->add_option("input", input, "dataset CSV");
  plot->add_option("input", input, "long-format benchmark CSV");
  selftest->add_option("--corrupt-kernel", flags.corrupt_kernel,
                       "test hook: scale the kernel in the normalization check");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fdrkit: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(out, SelfTestHooks{flags.corrupt_kernel});

    RunConfig cfg = flags.config.empty() ? RunConfig{} : RunConfig::load(flags.config);
    for (const auto& kv : flags.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::validation, "--set expects KEY=VALUE, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, opt] : flags.given)
      if (opt->count() > 0) cfg.set(key, flags.values[key]);
    if (!input.empty()) cfg.input = input;
    cfg.validate();

    if (simulate->parsed()) cmd_simulate(cfg, out);
    else if (estimate_cmd->parsed()) cmd_estimate(cfg, out);
    else if (benchmark->parsed()) return cmd_benchmark(cfg, out);
    else if (plot->parsed()) cmd_plot(cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "fdrkit: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "fdrkit: internal error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fdrkit
