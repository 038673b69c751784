#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vcnet {

/// One plotted sequence; drawn as a polyline, or as circles when `points`.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  bool points = false;
};

/// Shaded region between two curves sharing an x grid.
struct PlotBand {
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> upper;
  std::string color;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
  std::vector<PlotSeries> series;
  std::vector<PlotBand> bands;
};

/// Returns a palette color for index i (cycles).
const char* plot_color(size_t i) noexcept;

void write_svg(std::ostream& out, const Plot& plot);

} // namespace vcnet
