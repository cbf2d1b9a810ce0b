#pragma once

// Minimal static SVG charts for the report plots: line and scatter series on
// linear axes, vertical markers, and a bar chart.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "emergelab/error.hpp"

namespace emergelab::svg {

struct Series {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool points = false;  // scatter instead of polyline
  double opacity = 1.0;
};

struct Chart {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
  std::vector<double> vlines;
  double width = 640, height = 400;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double left = 60, right = 20, top = 36, bottom = 48;
  double w, h;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
  double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

inline void pad(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

inline void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
                 const std::string& yl, bool x_ticks = true) {
  os << "<rect x='0' y='0' width='" << f.w << "' height='" << f.h << "' fill='white'/>\n";
  os << "<text x='" << f.w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << escape(title) << "</text>\n";
  os << "<line x1='" << f.left << "' y1='" << f.h - f.bottom << "' x2='" << f.w - f.right << "' y2='" << f.h - f.bottom
     << "' stroke='black'/>\n";
  os << "<line x1='" << f.left << "' y1='" << f.top << "' x2='" << f.left << "' y2='" << f.h - f.bottom
     << "' stroke='black'/>\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = f.x0 + (f.x1 - f.x0) * k / 4.0, yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    if (x_ticks)
      os << "<text x='" << f.px(xv) << "' y='" << f.h - f.bottom + 16 << "' text-anchor='middle' font-size='10'>"
         << num(xv) << "</text>\n";
    os << "<text x='" << f.left - 6 << "' y='" << f.py(yv) + 3 << "' text-anchor='end' font-size='10'>" << num(yv)
       << "</text>\n";
  }
  os << "<text x='" << f.w / 2 << "' y='" << f.h - 8 << "' text-anchor='middle' font-size='12'>" << escape(xl)
     << "</text>\n";
  os << "<text x='14' y='" << f.h / 2 << "' text-anchor='middle' font-size='12' transform='rotate(-90 14 " << f.h / 2
     << ")'>" << escape(yl) << "</text>\n";
}

inline std::string open(double w, double h) {
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "' viewBox='0 0 " << w << ' '
     << h << "'>\n";
  return os.str();
}

}  // namespace detail

inline std::string render(const Chart& c) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : c.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  for (double v : c.vlines) x0 = std::min(x0, v), x1 = std::max(x1, v);
  detail::pad(x0, x1);
  detail::pad(y0, y1);
  detail::Frame f{x0, x1, y0, y1};
  f.w = c.width, f.h = c.height;

  std::ostringstream os;
  os << detail::open(f.w, f.h);
  detail::axes(os, f, c.title, c.xlabel, c.ylabel);
  for (const auto& s : c.series) {
    if (s.points) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx='" << f.px(s.x[i]) << "' cy='" << f.py(s.y[i]) << "' r='2.5' fill='" << s.color
             << "' fill-opacity='" << s.opacity << "'/>\n";
      continue;
    }
    os << "<polyline fill='none' stroke='" << s.color << "' stroke-opacity='" << s.opacity << "' points='";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
    os << "'/>\n";
  }
  for (double v : c.vlines)
    os << "<line x1='" << f.px(v) << "' y1='" << f.top << "' x2='" << f.px(v) << "' y2='" << f.h - f.bottom
       << "' stroke='#d62728' stroke-dasharray='4 3'/>\n";
  os << "</svg>\n";
  return os.str();
}

inline std::string render_bars(const std::string& title, const std::vector<std::string>& labels,
                               const std::vector<double>& values, const std::string& ylabel) {
  double y0 = 0.0, y1 = 0.0;
  for (double v : values)
    if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  detail::pad(y0, y1);
  detail::Frame f{0.0, static_cast<double>(values.size()), y0, y1};
  f.w = 480, f.h = 360;
  std::ostringstream os;
  os << detail::open(f.w, f.h);
  detail::axes(os, f, title, "", ylabel, false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = std::isfinite(values[i]) ? values[i] : 0.0;
    double xa = f.px(i + 0.2), xb = f.px(i + 0.8);
    double ya = f.py(std::max(v, 0.0)), yb = f.py(std::min(v, 0.0));
    os << "<rect x='" << xa << "' y='" << ya << "' width='" << xb - xa << "' height='" << yb - ya
       << "' fill='#1f77b4'/>\n";
    os << "<text x='" << (xa + xb) / 2 << "' y='" << f.h - f.bottom + 30 << "' text-anchor='middle' font-size='11'>"
       << detail::escape(i < labels.size() ? labels[i] : "") << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path);
  if (!os || !(os << content)) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace emergelab::svg
