#pragma once

#include <string>
#include <vector>

namespace drclab::svg {

/// One polyline on the plot. Empty color picks from a fixed palette.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 760;
    int height = 520;
};

/// Static SVG 1.1 log-log line plot: framed plot area, grid lines at the
/// tick positions, one marked polyline per series, legend in the top-left
/// corner. All inputs must be strictly positive (log axes). Deterministic
/// output for identical inputs. Throws std::invalid_argument on empty,
/// ragged, or nonpositive data.
std::string render_loglog(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace drclab::svg
