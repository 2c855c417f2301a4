#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qbm/harness.hpp"

namespace qbm {

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 80, kRight = 180, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
                                    "#7f7f7f"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0) * mag;
}

void widen(Range& r) {
  if (r.hi - r.lo < 1e-12 * std::max(1.0, std::abs(r.hi))) {
    const double pad = std::max(0.5, 0.1 * std::abs(r.hi));
    r.lo -= pad;
    r.hi += pad;
  }
  const double step = nice_step(r.hi - r.lo);
  r.lo = std::floor(r.lo / step) * step;
  r.hi = std::ceil(r.hi / step) * step;
}

std::string label_number(double v) {
  std::ostringstream s;
  s.precision(4);
  s << (std::abs(v) < 1e-12 ? 0.0 : v);
  return s.str();
}

std::string escape(const std::string& in) {
  std::string out;
  for (char c : in) {
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

}  // namespace

std::string chart_svg(const std::vector<ChartSeries>& series, const std::string& metric) {
  if (series.empty()) throw std::invalid_argument("render_chart: no traces");
  if (metric.empty()) throw std::invalid_argument("render_chart: empty metric");
  const bool energy = metric == "energy";
  std::vector<std::vector<std::pair<double, double>>> points;
  Range xr, yr;
  for (const auto& s : series) {
    const int xc = s.table.column(energy ? "e_cl" : "iter");
    const int yc = s.table.column(energy ? "e_q" : metric);
    if (xc < 0 || yc < 0) throw std::invalid_argument("render_chart: " + s.label + " has no column for '" + metric + "'");
    auto& pts = points.emplace_back();
    for (const auto& row : s.table.rows) {
      double x = row[static_cast<std::size_t>(xc)];
      double y = row[static_cast<std::size_t>(yc)];
      if (energy) {
        x = std::abs(x);
        y = std::abs(y);
      }
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      pts.emplace_back(x, y);
      xr.add(x);
      yr.add(y);
    }
  }
  if (!(xr.lo <= xr.hi)) throw std::invalid_argument("render_chart: no finite data for '" + metric + "'");
  widen(xr);
  widen(yr);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(xr.hi - xr.lo), ys = nice_step(yr.hi - yr.lo);
  for (double t = xr.lo; t <= xr.hi + 0.5 * xs; t += xs) {
    svg << "<line x1=\"" << px(t) << "\" y1=\"" << kTop + ph << "\" x2=\"" << px(t) << "\" y2=\"" << kTop + ph + 5
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(t) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << label_number(t)
        << "</text>\n";
  }
  for (double t = yr.lo; t <= yr.hi + 0.5 * ys; t += ys) {
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << kLeft << "\" y2=\"" << py(t)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << label_number(t)
        << "</text>\n";
  }
  const std::string xlabel = energy ? "|E_cl|" : "iteration";
  const std::string ylabel = energy ? "|E_q|" : metric;
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << kTop + ph / 2 << ")\">" << escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < points.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    const auto& pts = points[k];
    if (pts.size() == 1) {
      svg << "<circle cx=\"" << px(pts[0].first) << "\" cy=\"" << py(pts[0].second) << "\" r=\"4\" fill=\"" << color
          << "\"/>\n";
    } else if (!pts.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) svg << (i ? " " : "") << px(pts[i].first) << ',' << py(pts[i].second);
      svg << "\"/>\n";
    }
    const double ly = kTop + 10 + 20 * static_cast<double>(k);
    svg << "<line x1=\"" << kWidth - kRight + 15 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 46 << "\" y=\"" << ly + 4 << "\">" << escape(series[k].label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_chart(const std::vector<ChartSeries>& series, const std::string& metric,
                  const std::filesystem::path& destination) {
  const std::string svg = chart_svg(series, metric);
  std::ofstream out(destination, std::ios::binary);
  if (!out) throw std::runtime_error("render_chart: cannot open " + destination.string());
  out << svg;
  if (!out) throw std::runtime_error("render_chart: write failed for " + destination.string());
}

}  // namespace qbm
