#pragma once

#include <limits>
#include <string>
#include <vector>

namespace coexsim::cli::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  double y_min = std::numeric_limits<double>::quiet_NaN();
  double y_max = std::numeric_limits<double>::quiet_NaN();
};

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series, NaN leaves a gap
};

// Standalone SVG documents. Non-finite points are skipped.
std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series);
std::string bar_plot(const PlotSpec& spec, const std::vector<std::string>& series_names,
                     const std::vector<BarGroup>& groups);

}  // namespace coexsim::cli::svg
