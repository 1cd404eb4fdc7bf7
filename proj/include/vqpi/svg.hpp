#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqpi/csv.hpp"

namespace vqpi {

struct SvgSeries {
  std::string label;
  std::vector<std::array<double, 2>> points;
  std::string color;  // empty: pick from palette
  bool dashed = false;
};

struct SvgChartOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 660;
  int height = 420;
};

namespace detail {

inline const char* svg_palette(std::size_t i) {
  static const char* colors[] = {"#1f6fb4", "#d1495b", "#2e8b57",
                                 "#e09f3e", "#7b5ea7", "#4a4e69"};
  return colors[i % 6];
}

// Tick positions covering [lo, hi] at a 1/2/5 step.
inline std::vector<double> linear_ticks(double lo, double hi) {
  double span = hi - lo;
  if (span <= 0) return {lo};
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + step * 1e-9; t += step) ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return ticks;
}

inline std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> ticks;
  int e0 = static_cast<int>(std::floor(std::log10(lo) - 1e-9));
  int e1 = static_cast<int>(std::ceil(std::log10(hi) + 1e-9));
  for (int e = e0; e <= e1; ++e) {
    double v = std::pow(10.0, e);
    if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) ticks.push_back(v);
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

inline std::string tick_label(double v) {
  char buf[32];
  double a = std::abs(v);
  if (v != 0.0 && (a < 1e-3 || a >= 1e5))
    std::snprintf(buf, sizeof(buf), "%.0e", v);
  else
    std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

// Writes a polyline chart. Points with nonpositive coordinates on a log axis
// are dropped from that series.
inline void write_svg_chart(const std::string& path,
                            const std::vector<SvgSeries>& series,
                            const SvgChartOptions& opt) {
  const double ml = 64, mr = 18, mt = opt.title.empty() ? 16 : 34, mb = 46;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      if ((opt.logx && p[0] <= 0) || (opt.logy && p[1] <= 0)) continue;
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  if (!(xmin <= xmax))
    throw std::invalid_argument("write_svg_chart: no plottable points");
  if (xmin == xmax) {
    xmin -= opt.logx ? 0.5 * xmin : 1.0;
    xmax += opt.logx ? 0.5 * xmax : 1.0;
  }
  if (ymin == ymax) {
    ymin -= opt.logy ? 0.5 * ymin : 1.0;
    ymax += opt.logy ? 0.5 * ymax : 1.0;
  }
  if (!opt.logy) {
    double pad = 0.05 * (ymax - ymin);
    if (ymin > 0 && ymin - pad < 0)
      ymin = 0;
    else
      ymin -= pad;
    ymax += pad;
  }

  auto sx = [&](double x) {
    double t = opt.logx ? (std::log10(x) - std::log10(xmin)) / (std::log10(xmax) - std::log10(xmin))
                        : (x - xmin) / (xmax - xmin);
    return ml + t * pw;
  };
  auto sy = [&](double y) {
    double t = opt.logy ? (std::log10(y) - std::log10(ymin)) / (std::log10(ymax) - std::log10(ymin))
                        : (y - ymin) / (ymax - ymin);
    return mt + (1.0 - t) * ph;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
      << "\" height=\"" << opt.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    out << "<text x=\"" << opt.width / 2.0 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << opt.title << "</text>\n";

  auto xticks = opt.logx ? detail::decade_ticks(xmin, xmax) : detail::linear_ticks(xmin, xmax);
  auto yticks = opt.logy ? detail::decade_ticks(ymin, ymax) : detail::linear_ticks(ymin, ymax);
  for (double t : xticks) {
    double x = sx(t);
    out << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\"" << mt + ph
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
        << detail::tick_label(t) << "</text>\n";
  }
  for (double t : yticks) {
    double y = sy(t);
    out << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << detail::tick_label(t) << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  if (!opt.xlabel.empty())
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 8
        << "\" text-anchor=\"middle\">" << opt.xlabel << "</text>\n";
  if (!opt.ylabel.empty())
    out << "<text x=\"14\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << mt + ph / 2 << ")\">" << opt.ylabel << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    std::string color = s.color.empty() ? detail::svg_palette(i) : s.color;
    std::ostringstream pts;
    for (const auto& p : s.points) {
      if ((opt.logx && p[0] <= 0) || (opt.logy && p[1] <= 0)) continue;
      pts << sx(p[0]) << ',' << sy(p[1]) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    double ly = mt + 14 + 15.0 * static_cast<double>(i);
    out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw - 100
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"1.6\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    out << "<text x=\"" << ml + pw - 96 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";

  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("write_svg_chart: cannot open " + tmp.string());
    f << out.str();
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace vqpi
