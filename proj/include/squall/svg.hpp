#pragma once

#include <string>
#include <vector>

#include "squall/mesh.hpp"

namespace squall {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Standalone SVG line chart. Pure function of its inputs: numbers are
// printed with a fixed format, so equal data gives byte-identical markup.
std::string line_plot_svg(const std::string& title,
                          const std::vector<PlotSeries>& series,
                          int width = 720, int height = 480);

// Cell-shaded map of a nodal field; 1D fields fall back to a line chart.
std::string heatmap_svg(const std::string& title, const ScalarField& f,
                        int width = 720, int height = 560);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace squall
