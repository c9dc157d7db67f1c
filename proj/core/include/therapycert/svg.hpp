#pragma once

// Minimal static SVG plots for the CSV outputs.

#include <string>
#include <vector>

namespace therapycert::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

/// Polylines with markers, one color per series, legend at the top right.
std::string line_plot(const Axes& axes, const std::vector<Series>& series);

struct Cell {
    double x = 0.0;
    double y = 0.0;
    bool on = false;
};

/// Grid of filled squares, green where `on`, red otherwise.
std::string region_map(const Axes& axes, const std::vector<Cell>& cells);

} // namespace therapycert::svg
