#ifndef MCARTEST_SVG_PLOT_HPP
#define MCARTEST_SVG_PLOT_HPP

#include <string>
#include <vector>

#include "mcartest/harness.hpp"

namespace mcar {

enum class PlotAxis { auto_detect, param, n };

struct PlotOptions {
  PlotAxis x = PlotAxis::auto_detect;
  double alpha = 0.05;
  int width = 720;
  int height = 440;
};

// Rejection-rate curves, one per test, with Wilson bands and a reference line
// at alpha. Throws DataError on empty input, a single point, or rows that do
// not form one sweep.
std::string render_svg(const std::vector<ResultRow>& rows, const PlotOptions& opts = {});

PlotAxis parse_plot_axis(const std::string& s);

}  // namespace mcar

#endif
