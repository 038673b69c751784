#include "vcnet/svg.hpp"

#include "vcnet/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace vcnet {

namespace {

constexpr const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2e8b57", "#8d6a9f",
                                    "#e09f3e", "#3d5a80", "#9b2226", "#5f7470"};

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 48.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string num(double v) {
  if (!std::isfinite(v)) return "0";
  return format_double(std::round(v * 100.0) / 100.0);
}

} // namespace

const char* plot_color(size_t i) noexcept { return kPalette[i % std::size(kPalette)]; }

void write_svg(std::ostream& out, const Plot& plot) {
  Range xr, yr;
  for (const auto& s : plot.series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
  }
  for (const auto& b : plot.bands) {
    for (double v : b.x) xr.include(v);
    for (double v : b.lower) yr.include(v);
    for (double v : b.upper) yr.include(v);
  }
  xr.finish();
  yr.finish();

  const double w = plot.width, h = plot.height;
  const double x0 = kMarginLeft, x1 = w - kMarginRight;
  const double y0 = h - kMarginBottom, y1 = kMarginTop;
  auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
  auto py = [&](double v) { return y0 + (v - yr.lo) / (yr.hi - yr.lo) * (y1 - y0); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\""
      << plot.height << "\" viewBox=\"0 0 " << plot.width << " " << plot.height << "\">\n";
  out << "<rect width=\"" << plot.width << "\" height=\"" << plot.height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"14\">" << escape_text(plot.title) << "</text>\n";

  for (int i = 0; i <= 5; ++i) { // ticks and grid lines
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    out << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px(fx))
        << "\" y2=\"" << num(y1) << "\" stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(py(fy)) << "\" stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(y0 + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << escape_text(format_double(std::round(fx * 1000.0) / 1000.0)) << "</text>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(fy) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << escape_text(format_double(std::round(fy * 1000.0) / 1000.0)) << "</text>\n";
  }

  for (size_t i = 0; i < plot.bands.size(); ++i) {
    const auto& b = plot.bands[i];
    if (b.x.empty()) continue;
    const std::string color = b.color.empty() ? plot_color(i) : b.color;
    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (size_t j = 0; j < b.x.size(); ++j)
      out << num(px(b.x[j])) << "," << num(py(b.upper[j])) << " ";
    for (size_t j = b.x.size(); j-- > 0;)
      out << num(px(b.x[j])) << "," << num(py(b.lower[j])) << " ";
    out << "\"/>\n";
  }

  for (size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    if (s.x.empty()) continue;
    const std::string color = s.color.empty() ? plot_color(i) : s.color;
    if (s.points) {
      for (size_t j = 0; j < s.x.size(); ++j)
        out << "<circle cx=\"" << num(px(s.x[j])) << "\" cy=\"" << num(py(s.y[j]))
            << "\" r=\"2.5\" fill=\"" << color << "\" fill-opacity=\"0.7\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (size_t j = 0; j < s.x.size(); ++j)
        out << num(px(s.x[j])) << "," << num(py(s.y[j])) << " ";
      out << "\"/>\n";
    }
  }

  double legend_y = y1 + 12;
  for (size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    if (s.label.empty()) continue;
    const std::string color = s.color.empty() ? plot_color(i) : s.color;
    out << "<line x1=\"" << num(x1 - 120) << "\" y1=\"" << num(legend_y) << "\" x2=\""
        << num(x1 - 96) << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(x1 - 90) << "\" y=\"" << num(legend_y + 3)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape_text(s.label)
        << "</text>\n";
    legend_y += 14;
    if (legend_y > y0 - 10) break;
  }

  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\""
      << num(y0) << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\""
      << num(y1) << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(h - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << escape_text(plot.x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << num((y0 + y1) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 14 "
      << num((y0 + y1) / 2) << ")\">" << escape_text(plot.y_label) << "</text>\n";
  out << "</svg>\n";
}

} // namespace vcnet
