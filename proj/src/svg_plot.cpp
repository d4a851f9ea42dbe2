#include "qrsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace qrsim {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 180.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s)
{
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

std::string num(double v, int precision = 6)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// Tick step from {1, 2, 5} x 10^k giving roughly `target` intervals.
double nice_step(double span, int target)
{
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v)
  {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  void pad()
  {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-300 + 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
      const double d = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= d;
      hi += d;
    }
  }
};

} // namespace

std::string render_svg(const PlotSpec& spec)
{
  if (spec.series.empty()) {
    throw std::invalid_argument("render_svg: no series to plot");
  }
  Range xr;
  Range yr;
  for (double v : spec.x) {
    xr.add(v);
  }
  for (const auto& s : spec.series) {
    if (s.y.size() != spec.x.size()) {
      throw std::invalid_argument("render_svg: series '" + s.label + "' length differs from x");
    }
    for (double v : s.y) {
      yr.add(v);
    }
  }
  xr.pad();
  yr.pad();

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(spec.title) + "</text>\n";

  // grid and ticks
  const double xstep = nice_step(xr.hi - xr.lo, 8);
  for (double v = std::ceil(xr.lo / xstep) * xstep; v <= xr.hi + 1e-9 * xstep; v += xstep) {
    const double px = sx(v);
    svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px) + "\" y2=\"" +
           num(kTop + ph) + "\" stroke=\"#e5e5e5\"/>\n";
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
           num(std::abs(v) < 1e-12 * xstep ? 0.0 : v, 4) + "</text>\n";
  }
  const double ystep = nice_step(yr.hi - yr.lo, 6);
  for (double v = std::ceil(yr.lo / ystep) * ystep; v <= yr.hi + 1e-9 * ystep; v += ystep) {
    const double py = sy(v);
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(py) + "\" stroke=\"#e5e5e5\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" +
           num(std::abs(v) < 1e-12 * ystep ? 0.0 : v, 4) + "</text>\n";
  }
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  svg += "<text transform=\"translate(22," + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.3\" points=\"";
    for (std::size_t i = 0; i < spec.x.size(); ++i) {
      const double y = spec.series[k].y[i];
      if (!std::isfinite(y) || !std::isfinite(spec.x[i])) {
        continue;
      }
      svg += num(sx(spec.x[i]), 7) + "," + num(sy(y), 7) + " ";
    }
    svg += "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
    svg += "<line x1=\"" + num(kLeft + pw + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kLeft + pw + 40) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kLeft + pw + 46) + "\" y=\"" + num(ly + 4) + "\">" +
           escape(spec.series[k].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

} // namespace qrsim
