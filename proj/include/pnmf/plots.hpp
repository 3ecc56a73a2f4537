// plots.hpp - figure emission without external renderers: grayscale PPM
// abundance maps (min-max scaled, scale recorded in a sidecar) and minimal
// standalone SVG line charts for spectra and convergence curves.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pnmf/io.hpp"
#include "pnmf/types.hpp"

namespace pnmf {

// Min-max scaled grayscale PPM (P6 with r=g=b); constant maps render as
// mid-gray. Returns the "<min> <max>" scale line written to the sidecar.
inline std::string store_map_ppm(const Matrix& map, const std::string& path) {
  const double lo = map.minCoeff();
  const double hi = map.maxCoeff();
  const bool degenerate = !(hi - lo > 0.0);

  std::string bytes = "P6\n" + std::to_string(map.cols()) + " " + std::to_string(map.rows()) +
                      "\n255\n";
  bytes.reserve(bytes.size() + static_cast<size_t>(map.size()) * 3);
  for (int i = 0; i < map.rows(); ++i)
    for (int j = 0; j < map.cols(); ++j) {
      unsigned char g = 128;
      if (!degenerate) {
        const double t = (map(i, j) - lo) / (hi - lo);
        g = static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
      }
      bytes.push_back(static_cast<char>(g));
      bytes.push_back(static_cast<char>(g));
      bytes.push_back(static_cast<char>(g));
    }
  detail::write_file_bytes(path, bytes);

  std::string scale = "min " + detail::format_double(lo) + " max " + detail::format_double(hi);
  if (degenerate) scale += " (degenerate scale: constant map rendered mid-gray)";
  detail::write_file_bytes(path + ".txt", scale + "\n");
  return scale;
}

struct PlotSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

// Minimal multi-series line chart; fixed canvas, 4-tick axes, inline legend.
inline void store_line_chart_svg(const std::string& title, const std::string& x_label,
                                 const std::string& y_label,
                                 const std::vector<PlotSeries>& series, const std::string& path) {
  const double width = 800, height = 500;
  const double ml = 70, mr = 20, mt = 40, mb = 50;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool any = false;
  for (const auto& s : series)
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (!any) {
        x_min = x_max = s.xs[i];
        y_min = y_max = s.ys[i];
        any = true;
      } else {
        x_min = std::min(x_min, s.xs[i]);
        x_max = std::max(x_max, s.xs[i]);
        y_min = std::min(y_min, s.ys[i]);
        y_max = std::max(y_max, s.ys[i]);
      }
    }
  if (x_max - x_min <= 0) x_max = x_min + 1;
  if (y_max - y_min <= 0) y_max = y_min + 1;

  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const int n_colors = 8;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
         "\" height=\"" + detail::svg_num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt + ph) +
         "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(mt + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
         detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(mt + ph) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4.0;
    const double fy = y_min + (y_max - y_min) * t / 4.0;
    svg += "<text x=\"" + detail::svg_num(px(fx)) + "\" y=\"" + detail::svg_num(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::svg_num(fx) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::svg_num(fy) + "</text>\n";
  }
  svg += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" + detail::svg_num(height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + x_label +
         "</text>\n";
  svg += "<text x=\"16\" y=\"" + detail::svg_num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
         detail::svg_num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = palette[si % n_colors];
    std::string points;
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      points += detail::svg_num(px(s.xs[i])) + "," + detail::svg_num(py(s.ys[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = mt + 16 + 16 * static_cast<double>(si);
    svg += "<line x1=\"" + detail::svg_num(ml + pw - 150) + "\" y1=\"" + detail::svg_num(ly - 4) +
           "\" x2=\"" + detail::svg_num(ml + pw - 130) + "\" y2=\"" + detail::svg_num(ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ml + pw - 124) + "\" y=\"" + detail::svg_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.name + "</text>\n";
  }
  svg += "</svg>\n";
  detail::write_file_bytes(path, svg);
}

}  // namespace pnmf
