#pragma once

#include <string>
#include <vector>

namespace plab {

struct SvgSeries {
  std::string label;
  std::string color;  // any CSS color string
  std::vector<double> xs;
  std::vector<double> ys;
  bool dashed = false;
};

struct SvgMarker {
  double x = 0.0;  // vertical reference line, e.g. an escape time
  std::string label;
  std::string color = "#888888";
};

struct SvgPlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  int width = 920;
  int height = 560;
  std::vector<SvgSeries> series;
  std::vector<SvgMarker> markers;
};

// Self-contained SVG document; no external fonts or scripts. Non-finite
// points, and non-positive ones on log axes, are skipped.
std::string render_svg(const SvgPlot& plot);
void write_svg(const SvgPlot& plot, const std::string& path);

// Default color cycle used when SvgSeries::color is empty.
const std::string& svg_palette(std::size_t index);

}  // namespace plab
