// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dune/grid/field.hpp"

namespace dune::app::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

/// Stacked line-chart panels sharing one x axis; each panel is a
/// <g class="panel"> element. NaN y values break the line.
std::string line_panels(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<Panel>& panels);

/// Matrix of cells coloured on a diverging scale around zero, with values printed.
std::string heatmap(const std::string& title, const std::vector<std::string>& rows,
                    const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values);

/// Raster of a field (north up, 0E at the left) on a symmetric diverging scale.
std::string field_map(const std::string& title, const std::string& caption, const Field& field);

/// sum cos(lat) x / sum cos(lat) over non-missing cells.
double cosine_weighted_mean(const Field& field);

}  // namespace dune::app::plot
