#include "plab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace plab {
namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

bool usable(double v, bool log_axis) {
  return std::isfinite(v) && (!log_axis || v > 0.0);
}

double axis_value(double v, bool log_axis) {
  return log_axis ? std::log10(v) : v;
}

std::string fmt(double v) {
  char buf[48];
  if (v != 0.0 && (std::fabs(v) >= 1e5 || std::fabs(v) < 1e-3))
    std::snprintf(buf, sizeof(buf), "%.1e", v);
  else
    std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick positions at 1/2/5 multiples on a linear axis, decades on a log axis.
std::vector<double> ticks(double lo, double hi, bool log_axis) {
  std::vector<double> out;
  if (log_axis) {
    int a = static_cast<int>(std::ceil(lo - 1e-9));
    int b = static_cast<int>(std::floor(hi + 1e-9));
    for (int e = a; e <= b; ++e) out.push_back(static_cast<double>(e));
    if (out.size() < 2) {
      out = {lo, hi};
    }
    return out;
  }
  double span = hi - lo;
  double raw = span / 6.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + step * 1e-9; v += step) out.push_back(v);
  return out;
}

}  // namespace

const std::string& svg_palette(std::size_t index) {
  static const std::string colors[] = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
      "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
  };
  return colors[index % (sizeof(colors) / sizeof(colors[0]))];
}

std::string render_svg(const SvgPlot& plot) {
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_y = std::numeric_limits<double>::infinity(), hi_y = -lo_y;
  for (const auto& s : plot.series) {
    if (s.xs.size() != s.ys.size())
      throw std::invalid_argument("series " + s.label + " has mismatched x/y sizes");
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!usable(s.xs[i], plot.log_x) || !usable(s.ys[i], plot.log_y)) continue;
      double x = axis_value(s.xs[i], plot.log_x);
      double y = axis_value(s.ys[i], plot.log_y);
      lo_x = std::min(lo_x, x);
      hi_x = std::max(hi_x, x);
      lo_y = std::min(lo_y, y);
      hi_y = std::max(hi_y, y);
    }
  }
  if (!(lo_x <= hi_x)) {
    lo_x = 0.0;
    hi_x = 1.0;
  }
  if (!(lo_y <= hi_y)) {
    lo_y = 0.0;
    hi_y = 1.0;
  }
  if (hi_x == lo_x) hi_x = lo_x + 1.0;
  if (hi_y == lo_y) {
    lo_y -= 0.5;
    hi_y += 0.5;
  }
  double pad_y = 0.05 * (hi_y - lo_y);
  lo_y -= pad_y;
  hi_y += pad_y;

  const double px0 = kMarginLeft, px1 = plot.width - kMarginRight;
  const double py0 = plot.height - kMarginBottom, py1 = kMarginTop;
  auto to_px = [&](double x) { return px0 + (x - lo_x) / (hi_x - lo_x) * (px1 - px0); };
  auto to_py = [&](double y) { return py0 + (y - lo_y) / (hi_y - lo_y) * (py1 - py0); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width
      << "\" height=\"" << plot.height << "\" viewBox=\"0 0 " << plot.width
      << " " << plot.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  if (!plot.title.empty())
    out << "<text x=\"" << plot.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
           "font-size=\"16\">"
        << escape_text(plot.title) << "</text>\n";

  for (double t : ticks(lo_x, hi_x, plot.log_x)) {
    double px = to_px(t);
    double value = plot.log_x ? std::pow(10.0, t) : t;
    out << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px
        << "\" y2=\"" << py1 << "\" stroke=\"#eeeeee\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << py0 + 18
        << "\" text-anchor=\"middle\">" << fmt(value) << "</text>\n";
  }
  for (double t : ticks(lo_y, hi_y, plot.log_y)) {
    double py = to_py(t);
    double value = plot.log_y ? std::pow(10.0, t) : t;
    out << "<line x1=\"" << px0 << "\" y1=\"" << py << "\" x2=\"" << px1
        << "\" y2=\"" << py << "\" stroke=\"#eeeeee\"/>\n";
    out << "<text x=\"" << px0 - 6 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\">" << fmt(value) << "</text>\n";
  }
  out << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\"" << px1 - px0
      << "\" height=\"" << py0 - py1
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  if (!plot.xlabel.empty())
    out << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << plot.height - 12
        << "\" text-anchor=\"middle\">" << escape_text(plot.xlabel) << "</text>\n";
  if (!plot.ylabel.empty())
    out << "<text x=\"16\" y=\"" << (py0 + py1) / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (py0 + py1) / 2 << ")\">" << escape_text(plot.ylabel) << "</text>\n";

  for (const auto& mk : plot.markers) {
    if (!usable(mk.x, plot.log_x)) continue;
    double px = to_px(axis_value(mk.x, plot.log_x));
    if (px < px0 || px > px1) continue;
    out << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px
        << "\" y2=\"" << py1 << "\" stroke=\"" << mk.color
        << "\" stroke-dasharray=\"5,4\"/>\n";
    if (!mk.label.empty())
      out << "<text x=\"" << px + 4 << "\" y=\"" << py1 + 14 << "\" fill=\""
          << mk.color << "\">" << escape_text(mk.label) << "</text>\n";
  }

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const std::string& color = s.color.empty() ? svg_palette(si) : s.color;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (s.dashed) out << " stroke-dasharray=\"6,3\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!usable(s.xs[i], plot.log_x) || !usable(s.ys[i], plot.log_y)) continue;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ",
                    to_px(axis_value(s.xs[i], plot.log_x)),
                    to_py(axis_value(s.ys[i], plot.log_y)));
      out << buf;
    }
    out << "\"/>\n";
  }
  // Legend in the top-right corner of the plot area.
  double ly = py1 + 16;
  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    if (s.label.empty()) continue;
    const std::string& color = s.color.empty() ? svg_palette(si) : s.color;
    out << "<line x1=\"" << px1 - 150 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << px1 - 126 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px1 - 120 << "\" y=\"" << ly << "\">"
        << escape_text(s.label) << "</text>\n";
    ly += 17;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void write_svg(const SvgPlot& plot, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << render_svg(plot);
  if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace plab
