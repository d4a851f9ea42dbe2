#pragma once

#include <string>
#include <vector>

namespace qrsim {

struct PlotSeries
{
  std::string label;
  std::vector<double> y;
};

struct PlotSpec
{
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<PlotSeries> series;
};

/// Static line chart with axes, ticks and a legend. Throws
/// std::invalid_argument if there are no series or lengths disagree.
std::string render_svg(const PlotSpec& spec);

} // namespace qrsim
