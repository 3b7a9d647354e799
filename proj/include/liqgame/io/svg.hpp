#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "liqgame/error.hpp"

namespace liqgame::io {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

namespace detail {

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

struct Axis {
  double lo;
  double hi;
  bool log;

  double map(double v, double from, double to) const {
    const double a = log ? std::log10(v) : v;
    return from + (a - lo) / (hi - lo) * (to - from);
  }

  double value_at(double frac) const {
    const double a = lo + frac * (hi - lo);
    return log ? std::pow(10.0, a) : a;
  }
};

inline Axis make_axis(const std::vector<PlotSeries>& series, bool use_x, bool log) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const PlotSeries& s : series) {
    for (double v : use_x ? s.x : s.y) {
      if (log && !(v > 0.0)) {
        throw Error(ErrorCategory::kDegenerate, "log axis needs positive values");
      }
      const double a = log ? std::log10(v) : v;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace detail

/// Line plot on a fixed 800x600 canvas.  The output depends only on the
/// inputs, so identical data give byte-identical documents.
inline std::string emit_svg(const std::vector<PlotSeries>& series, const PlotStyle& style) {
  if (series.empty()) throw Error(ErrorCategory::kDegenerate, "plot needs at least one series");
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw Error(ErrorCategory::kInvalidArgument, "series " + s.label + " has mismatched sizes");
    }
    if (s.x.size() < 2) {
      throw Error(ErrorCategory::kDegenerate, "series " + s.label + " needs at least 2 points");
    }
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) {
        throw Error(ErrorCategory::kNonFinite, "series " + s.label + " has non-finite values");
      }
    }
  }
  static constexpr std::array<const char*, 8> kColors = {
      "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 600.0;
  constexpr double kLeft = 90.0;
  constexpr double kRight = 640.0;
  constexpr double kTop = 50.0;
  constexpr double kBottom = 530.0;

  const detail::Axis ax = detail::make_axis(series, true, style.log_x);
  const detail::Axis ay = detail::make_axis(series, false, style.log_y);
  using detail::fmt;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" +
         fmt("%.0f", kHeight) + "\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"18\">" +
         detail::escape_xml(style.title) + "</text>\n";
  out += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
         fmt("%.2f", kRight - kLeft) + "\" height=\"" + fmt("%.2f", kBottom - kTop) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double px = kLeft + frac * (kRight - kLeft);
    const double py = kBottom - frac * (kBottom - kTop);
    out += "<line x1=\"" + fmt("%.2f", px) + "\" y1=\"" + fmt("%.2f", kBottom) + "\" x2=\"" +
           fmt("%.2f", px) + "\" y2=\"" + fmt("%.2f", kBottom + 5.0) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt("%.2f", px) + "\" y=\"" + fmt("%.2f", kBottom + 20.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           fmt("%.3g", ax.value_at(frac)) + "</text>\n";
    out += "<line x1=\"" + fmt("%.2f", kLeft - 5.0) + "\" y1=\"" + fmt("%.2f", py) + "\" x2=\"" +
           fmt("%.2f", kLeft) + "\" y2=\"" + fmt("%.2f", py) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt("%.2f", kLeft - 8.0) + "\" y=\"" + fmt("%.2f", py + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
           fmt("%.3g", ay.value_at(frac)) + "</text>\n";
  }
  if (!style.log_y && ay.lo <= 0.0 && ay.hi >= 0.0) {
    const double py = ay.map(0.0, kBottom, kTop);
    out += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", py) + "\" x2=\"" +
           fmt("%.2f", kRight) + "\" y2=\"" + fmt("%.2f", py) +
           "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  }
  out += "<text x=\"" + fmt("%.2f", 0.5 * (kLeft + kRight)) + "\" y=\"" +
         fmt("%.2f", kBottom + 45.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         detail::escape_xml(style.x_label) + "</text>\n";
  out += "<text x=\"20\" y=\"" + fmt("%.2f", 0.5 * (kTop + kBottom)) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 20 " +
         fmt("%.2f", 0.5 * (kTop + kBottom)) + ")\">" + detail::escape_xml(style.y_label) +
         "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      if (k > 0) out += ' ';
      out += fmt("%.2f", ax.map(series[s].x[k], kLeft, kRight)) + ',' +
             fmt("%.2f", ay.map(series[s].y[k], kBottom, kTop));
    }
    out += "\"/>\n";
    const double ly = kTop + 10.0 + 20.0 * static_cast<double>(s);
    out += "<line x1=\"655\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"680\" y2=\"" + fmt("%.2f", ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"686\" y=\"" + fmt("%.2f", ly + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::escape_xml(series[s].label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace liqgame::io
