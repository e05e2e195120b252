#include "fdrkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "fdrkit/error.hpp"
#include "fdrkit/io.hpp"

namespace fdrkit {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::validation, "config key '" + key + "': " + why + " (got '" + value + "')");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "expected an integer");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  const auto x = io::parse_real(v);
  if (!x || !std::isfinite(*x)) bad_value(key, v, "expected a real number");
  return *x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v, "expected true or false");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F&& item) {
  std::vector<T> out;
  for (const auto& s : split_list(v)) {
    try {
      out.push_back(item(s));
    } catch (const Error& e) {
      bad_value(key, v, e.what());
    }
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::string(fmt(xs[i]));
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "out", "seed", "model", "method", "basis", "dim", "ndirs", "slices", "bandwidth", "bandwidth_grid", "kernel",
      "a_cap", "c2", "e_n", "ridge", "transform", "n", "m", "p", "noise_sd", "plots", "threads", "input"};
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "out") {
    if (v.empty()) bad_value(key, v, "must not be empty");
    out = v;
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, v);
  } else if (key == "model") {
    models = parse_list<ModelId>(key, v, parse_model);
  } else if (key == "method") {
    methods = parse_list<Method>(key, v, parse_method);
  } else if (key == "basis") {
    bases = parse_list<BasisKind>(key, v, parse_basis_kind);
  } else if (key == "dim") {
    dims = parse_list<int>(key, v, [&](const std::string& s) { return parse_int<int>(key, s); });
  } else if (key == "ndirs") {
    ndirs = parse_int<int>(key, v);
  } else if (key == "slices") {
    slices = parse_int<int>(key, v);
  } else if (key == "bandwidth") {
    if (v == "cv") bandwidth.reset();
    else bandwidth = parse_double(key, v);
  } else if (key == "bandwidth_grid") {
    bandwidth_grid = parse_list<double>(key, v, [&](const std::string& s) { return parse_double(key, s); });
  } else if (key == "kernel") {
    try {
      kernel = parse_kernel_kind(v);
    } catch (const Error& e) {
      bad_value(key, v, e.what());
    }
  } else if (key == "a_cap") {
    a_cap = parse_double(key, v);
  } else if (key == "c2") {
    c2 = parse_double(key, v);
  } else if (key == "e_n") {
    e_n = parse_double(key, v);
  } else if (key == "ridge") {
    ridge = parse_double(key, v);
  } else if (key == "transform") {
    try {
      transform = parse_response_transform(v);
    } catch (const Error& e) {
      bad_value(key, v, e.what());
    }
  } else if (key == "n") {
    n = parse_int<int>(key, v);
  } else if (key == "m") {
    m = parse_int<int>(key, v);
  } else if (key == "p") {
    p = parse_int<int>(key, v);
  } else if (key == "noise_sd") {
    noise_sd = parse_double(key, v);
  } else if (key == "plots") {
    plots = parse_bool(key, v);
  } else if (key == "threads") {
    threads = parse_int<int>(key, v);
  } else if (key == "input") {
    input = v;
  } else {
    throw Error(ErrorKind::validation, "unknown config key '" + key + "'");
  }
}

void RunConfig::merge_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    const std::string where = source + ":" + std::to_string(row) + ": ";
    if (eq == std::string::npos) throw Error(ErrorKind::validation, where + "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    if (!seen.insert(key).second) throw Error(ErrorKind::validation, where + "duplicate key '" + key + "'");
    try {
      set(key, s.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorKind::validation, where + e.what());
    }
  }
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig cfg;
  cfg.merge_text(text, source);
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  auto line = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto real = [](double x) { return io::format_real(x); };
  line("out", out);
  line("seed", std::to_string(seed));
  if (!models.empty()) line("model", join(models, [](ModelId x) { return to_string(x); }));
  if (!methods.empty()) line("method", join(methods, [](Method x) { return to_string(x); }));
  if (!bases.empty()) line("basis", join(bases, [](BasisKind x) { return to_string(x); }));
  if (!dims.empty()) line("dim", join(dims, [](int x) { return std::to_string(x); }));
  line("ndirs", std::to_string(ndirs));
  if (slices) line("slices", std::to_string(*slices));
  line("bandwidth", bandwidth ? real(*bandwidth) : "cv");
  if (!bandwidth_grid.empty()) line("bandwidth_grid", join(bandwidth_grid, real));
  line("kernel", to_string(kernel));
  line("a_cap", real(a_cap));
  if (c2) line("c2", real(*c2));
  if (e_n) line("e_n", real(*e_n));
  line("ridge", real(ridge));
  line("transform", to_string(transform));
  line("n", std::to_string(n));
  line("m", std::to_string(m));
  line("p", std::to_string(p));
  line("noise_sd", real(noise_sd));
  line("plots", plots ? "true" : "false");
  if (threads) line("threads", std::to_string(*threads));
  if (!input.empty()) line("input", input);
  return os.str();
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorKind::validation, "config key '" + key + "': " + why);
  };
  if (ndirs < 1) fail("ndirs", "must be >= 1");
  if (slices && *slices < 2) fail("slices", "must be >= 2");
  if (bandwidth && !(*bandwidth > 0.0)) fail("bandwidth", "must be positive");
  for (double h : bandwidth_grid)
    if (!(h > 0.0)) fail("bandwidth_grid", "values must be positive");
  if (!(a_cap > 0.0)) fail("a_cap", "must be positive");
  if (c2 && !(*c2 >= 0.0)) fail("c2", "must be nonnegative");
  if (e_n && !(*e_n > 0.0)) fail("e_n", "must be positive");
  if (!(ridge >= 0.0)) fail("ridge", "must be nonnegative");
  if (n < 2) fail("n", "must be >= 2");
  if (m < 1) fail("m", "must be >= 1");
  if (p < 3) fail("p", "must be >= 3");
  if (!(noise_sd >= 0.0)) fail("noise_sd", "must be nonnegative");
  if (threads && *threads < 1) fail("threads", "must be >= 1");
  for (int d : dims)
    if (d < 1) fail("dim", "values must be >= 1");
  if (ndirs > 0)
    for (int d : dims)
      if (ndirs > d) fail("ndirs", "must not exceed dim");
}

FaveConfig RunConfig::estimator(int D, BasisKind basis) const {
  FaveConfig cfg;
  cfg.D = D;
  cfg.basis_kind = basis;
  cfg.K = ndirs;
  cfg.kernel = Kernel{kernel};
  cfg.bandwidth = bandwidth;
  cfg.bandwidth_grid = bandwidth_grid;
  ClippingParams clip = default_clipping(cfg.kernel);
  clip.a_cap = a_cap;
  if (c2) clip.c2 = *c2;
  cfg.clipping = clip;
  cfg.clipping_floor = e_n;
  cfg.ridge = ridge;
  cfg.response = transform;
  cfg.slices = slices.value_or(10);
  return cfg;
}

int RunConfig::resolved_threads() const {
  if (threads) return *threads;
  if (const char* env = std::getenv("FDRKIT_THREADS"); env && *env) {
    try {
      const int t = parse_int<int>("FDRKIT_THREADS", env);
      if (t >= 1) return t;
    } catch (const Error&) {
    }
    throw Error(ErrorKind::validation, std::string("FDRKIT_THREADS must be a positive integer (got '") + env + "')");
  }
  return 1;
}

}  // namespace fdrkit
