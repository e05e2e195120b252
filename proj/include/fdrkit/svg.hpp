#pragma once

#include <string>
#include <vector>

namespace fdrkit::svg {

struct LineSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  int color = -1;  // palette index; -1 uses the series position
};

struct ScatterSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// One box per method inside a group (one group per D).
struct BoxSeries {
  std::string label;
  std::vector<double> values;
};

struct BoxGroup {
  std::string label;
  std::vector<BoxSeries> boxes;
};

std::string line_plot(const std::vector<LineSeries>& series, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel);

std::string scatter_plot(const std::vector<ScatterSeries>& series, const std::string& title,
                         const std::string& xlabel, const std::string& ylabel);

/// Tukey boxplots: whiskers reach the most extreme values within 1.5 IQR of
/// the box, points beyond are drawn individually. Quartiles are type 7.
std::string grouped_boxplot(const std::vector<BoxGroup>& groups, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel);

}  // namespace fdrkit::svg
