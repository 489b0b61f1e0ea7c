#pragma once

#include <string>
#include <vector>

namespace densan {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // markers instead of a polyline
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Static SVG line/marker plot. Output depends only on the input.
std::string render_svg(const Plot& plot);

}  // namespace densan
