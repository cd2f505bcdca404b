#pragma once

// Sweep result rendering: a CSV table and, for two-dimensional spaces, an
// SVG scatter map. Positive robustness is drawn green, non-positive orange;
// fill opacity is |rho| / max |rho| over the finite values (infinite
// values are drawn opaque).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "stlstar/error.hpp"
#include "stlstar/formula.hpp"
#include "stlstar/monitor.hpp"
#include "stlstar/sweep.hpp"

namespace stlstar {

inline constexpr const char* kPositiveColor = "#1a9641";
inline constexpr const char* kNegativeColor = "#f07f1a";

namespace detail {

inline std::string format_g12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
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

}  // namespace detail

/// Columns: one per swept parameter, robustness, satisfied, depth.
inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  for (const auto& name : result.axis_names) out << name << ',';
  out << "robustness,satisfied,depth\n";
  for (const auto& p : result.points) {
    for (double v : p.params) out << detail::format_g12(v) << ',';
    out << format_robustness(p.robustness) << ',' << (p.satisfied ? "true" : "false") << ',' << p.depth << '\n';
  }
}

inline void write_sweep_svg(std::ostream& out, const SweepResult& result) {
  if (result.axis_names.size() != 2) throw ConfigError("SVG export needs a two-dimensional sweep");
  constexpr double width = 640, height = 520, left = 80, right = 30, top = 50, bottom = 70;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY, rmax = 0.0;
  for (const auto& p : result.points) {
    xmin = std::min(xmin, p.params[0]);
    xmax = std::max(xmax, p.params[0]);
    ymin = std::min(ymin, p.params[1]);
    ymax = std::max(ymax, p.params[1]);
    if (p.ok() && std::isfinite(p.robustness)) rmax = std::max(rmax, std::abs(p.robustness));
  }
  if (result.points.empty()) xmin = ymin = 0.0, xmax = ymax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };
  using detail::format_g12;
  using detail::xml_escape;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (result.formula)
    out << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << xml_escape(format(result.formula)) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << sx(fx) << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_g12(fx) << "</text>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_g12(fy) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(result.axis_names[0])
      << "</text>\n";
  out << "<text x=\"20\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 20 " << top + plot_h / 2 << ")\">"
      << xml_escape(result.axis_names[1]) << "</text>\n";

  for (const auto& p : result.points) {
    const double cx = sx(p.params[0]);
    const double cy = sy(p.params[1]);
    if (!p.ok()) {
      out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"4\" fill=\"none\" stroke=\"#888\"/>\n";
      continue;
    }
    const double opacity = std::isfinite(p.robustness) ? (rmax > 0 ? std::abs(p.robustness) / rmax : 0.0) : 1.0;
    const char* color = p.satisfied ? kPositiveColor : kNegativeColor;
    out << "<circle class=\"" << (p.satisfied ? "positive" : "negative") << "\" cx=\"" << cx << "\" cy=\"" << cy
        << "\" r=\"4\" fill=\"" << color << "\" fill-opacity=\"" << format_g12(opacity) << "\" stroke=\"" << color
        << "\" stroke-opacity=\"0.35\"><title>" << format_robustness(p.robustness) << "</title></circle>\n";
  }
  out << "</svg>\n";
}

/// Writes `<stem>.csv` and, for two axes, `<stem>.svg`.
inline void export_sweep(const SweepResult& result, const std::string& stem) {
  {
    std::ofstream csv(stem + ".csv");
    if (!csv) throw Error("cannot write " + stem + ".csv");
    write_sweep_csv(csv, result);
    if (!csv) throw Error("failed writing " + stem + ".csv");
  }
  if (result.axis_names.size() == 2) {
    std::ofstream svg(stem + ".svg");
    if (!svg) throw Error("cannot write " + stem + ".svg");
    write_sweep_svg(svg, result);
    if (!svg) throw Error("failed writing " + stem + ".svg");
  }
}

}  // namespace stlstar
