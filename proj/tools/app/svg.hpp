#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace geosched::app {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Self-contained SVG line chart with axes, ticks and a legend.
void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace geosched::app
