#pragma once

#include <array>
#include <string>
#include <vector>

#include "thermo/learn.hpp"

namespace thermo::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Polyline chart with markers and a legend; axis ranges cover all series.
std::string line_chart(const Axes& axes, const std::vector<Series>& series);

/// One box per label: box from q1 to q3, median line, whiskers to min and max.
std::string box_plot(const Axes& axes, const std::vector<std::string>& labels, const std::vector<BoxStats>& boxes);

/// Color ramp used by heatmaps: piecewise linear through
/// #30123b (t=0), #4686fb (0.25), #1ae4b6 (0.5), #f9ba38 (0.75), #7a0403 (1).
std::array<int, 3> ramp(double t);

/// Cell-centred heatmap of values[j * u.size() + i]; NaN cells are drawn grey.
std::string heatmap(const Axes& axes, const std::vector<double>& u, const std::vector<double>& v,
                    const std::vector<double>& values);

}  // namespace thermo::svg
