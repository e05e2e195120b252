#include "fdrkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>

namespace fdrkit::svg {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

const char* color(std::size_t k) { return kPalette[k % (sizeof kPalette / sizeof *kPalette)]; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

// Round tick step (1, 2 or 5 times a power of ten) giving about five ticks.
std::vector<double> ticks(Range& r) {
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  r.lo = std::floor(r.lo / step) * step;
  r.hi = std::ceil(r.hi / step) * step;
  std::vector<double> out;
  for (double t = r.lo; t <= r.hi + 0.5 * step; t += step) out.push_back(t);
  return out;
}

class Canvas {
 public:
  Canvas(Range x, Range y, bool numeric_x = true) : x_(x), y_(y) {
    x_.finish();
    y_.finish();
    if (numeric_x) xticks_ = ticks(x_);
    yticks_ = ticks(y_);
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }
  const Range& xrange() const { return x_; }

  std::ostringstream& body() { return body_; }

  void legend(std::size_t k, const std::string& label, bool dashed = false, bool marker = false) {
    legend(k, k, label, dashed, marker);
  }
  void legend(std::size_t k, std::size_t c, const std::string& label, bool dashed, bool marker) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(k);
    const double x = kWidth - kRight + 15;
    if (marker) {
      body_ << "<circle cx=\"" << num(x + 10) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\"" << color(c) << "\"/>\n";
    } else {
      body_ << "<path d=\"M" << num(x) << ',' << num(y) << " h20\" stroke=\"" << color(c) << "\" stroke-width=\"2\""
            << (dashed ? " stroke-dasharray=\"6,4\"" : "") << " fill=\"none\"/>\n";
    }
    body_ << "<text x=\"" << num(x + 26) << "\" y=\"" << num(y + 4) << "\" font-size=\"12\">" << escape(label)
          << "</text>\n";
  }

  std::string render(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<std::pair<double, std::string>>& category_ticks = {}) const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    os << "<path d=\"M" << num(x0) << ',' << num(y1) << " V" << num(y0) << " H" << num(x1)
       << "\" stroke=\"black\" fill=\"none\"/>\n";
    for (double t : yticks_) {
      os << "<path d=\"M" << num(x0 - 5) << ',' << num(py(t)) << " h5\" stroke=\"black\"/>\n";
      os << "<path d=\"M" << num(x0) << ',' << num(py(t)) << " H" << num(x1) << "\" stroke=\"#e0e0e0\"/>\n";
      os << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py(t) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
         << tick_label(t) << "</text>\n";
    }
    for (double t : xticks_) {
      os << "<path d=\"M" << num(px(t)) << ',' << num(y0) << " v5\" stroke=\"black\"/>\n";
      os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y0 + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
         << tick_label(t) << "</text>\n";
    }
    for (const auto& [x, label] : category_ticks)
      os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(y0 + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
         << escape(label) << "</text>\n";
    os << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(kTop - 15)
       << "\" font-size=\"14\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
    os << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(kHeight - 15)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    os << "<text transform=\"translate(18," << num(0.5 * (y0 + y1)) << ") rotate(-90)\" font-size=\"12\" "
       << "text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
    os << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  Range x_, y_;
  std::vector<double> xticks_, yticks_;
  std::ostringstream body_;
};

double quantile7(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string line_plot(const std::vector<LineSeries>& series, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  Canvas c(xr, yr);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    auto& os = c.body();
    os << "<path d=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      os << (i == 0 ? 'M' : 'L') << num(c.px(s.x[i])) << ',' << num(c.py(s.y[i])) << ' ';
    const std::size_t col = s.color >= 0 ? static_cast<std::size_t>(s.color) : k;
    os << "\" stroke=\"" << color(col) << "\" stroke-width=\"2\" fill=\"none\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    c.legend(k, col, s.label, s.dashed, false);
  }
  return c.render(title, xlabel, ylabel);
}

std::string scatter_plot(const std::vector<ScatterSeries>& series, const std::string& title,
                         const std::string& xlabel, const std::string& ylabel) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  Canvas c(xr, yr);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      c.body() << "<circle cx=\"" << num(c.px(s.x[i])) << "\" cy=\"" << num(c.py(s.y[i])) << "\" r=\"2.5\" fill=\""
               << color(k) << "\" fill-opacity=\"0.7\"/>\n";
    c.legend(k, s.label, false, true);
  }
  return c.render(title, xlabel, ylabel);
}

std::string grouped_boxplot(const std::vector<BoxGroup>& groups, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel) {
  Range yr;
  std::vector<std::string> labels;
  for (const auto& g : groups)
    for (const auto& b : g.boxes) {
      for (double v : b.values) yr.add(v);
      if (std::find(labels.begin(), labels.end(), b.label) == labels.end()) labels.push_back(b.label);
    }
  Range xr;
  xr.lo = 0.0;
  xr.hi = static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  Canvas c(xr, yr, false);

  const double slot = 0.8 / static_cast<double>(std::max<std::size_t>(labels.size(), 1));
  std::vector<std::pair<double, std::string>> cats;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    cats.emplace_back(static_cast<double>(g) + 0.5, groups[g].label);
    for (const auto& b : groups[g].boxes) {
      std::vector<double> v;
      for (double x : b.values)
        if (std::isfinite(x)) v.push_back(x);
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      const std::size_t k = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), b.label) - labels.begin());
      const double q1 = quantile7(v, 0.25), med = quantile7(v, 0.5), q3 = quantile7(v, 0.75);
      const double fence_lo = q1 - 1.5 * (q3 - q1), fence_hi = q3 + 1.5 * (q3 - q1);
      double wlo = q1, whi = q3;
      for (double x : v) {
        if (x >= fence_lo) wlo = std::min(wlo, x);
        if (x <= fence_hi) whi = std::max(whi, x);
      }
      const double centre = static_cast<double>(g) + 0.1 + slot * (static_cast<double>(k) + 0.5);
      const double left = c.px(centre - 0.35 * slot), right = c.px(centre + 0.35 * slot), mid = c.px(centre);
      auto& os = c.body();
      os << "<path d=\"M" << num(mid) << ',' << num(c.py(wlo)) << " V" << num(c.py(q1)) << " M" << num(mid) << ','
         << num(c.py(q3)) << " V" << num(c.py(whi)) << " M" << num(0.5 * (left + mid)) << ',' << num(c.py(wlo)) << " H"
         << num(0.5 * (right + mid)) << " M" << num(0.5 * (left + mid)) << ',' << num(c.py(whi)) << " H"
         << num(0.5 * (right + mid)) << "\" stroke=\"" << color(k) << "\" fill=\"none\"/>\n";
      os << "<path d=\"M" << num(left) << ',' << num(c.py(q1)) << " H" << num(right) << " V" << num(c.py(q3)) << " H"
         << num(left) << " Z\" stroke=\"" << color(k) << "\" fill=\"" << color(k) << "\" fill-opacity=\"0.25\"/>\n";
      os << "<path d=\"M" << num(left) << ',' << num(c.py(med)) << " H" << num(right) << "\" stroke=\"" << color(k)
         << "\" stroke-width=\"2\"/>\n";
      for (double x : v)
        if (x < fence_lo || x > fence_hi)
          os << "<circle cx=\"" << num(mid) << "\" cy=\"" << num(c.py(x)) << "\" r=\"2\" fill=\"none\" stroke=\""
             << color(k) << "\"/>\n";
    }
  }
  for (std::size_t k = 0; k < labels.size(); ++k) c.legend(k, labels[k]);
  return c.render(title, xlabel, ylabel, cats);
}

}  // namespace fdrkit::svg
