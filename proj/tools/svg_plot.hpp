#pragma once

#include "beams/scenarios.hpp"

#include <string>

namespace beams {

struct PlotSpec {
    std::string title;
    std::string x_label;
    bool log_x = false;
    bool log_y = false;
};

// Line plot of every column against the first; non-finite points and, on log axes, non-positive ones are skipped.
std::string svg_line_plot(const Series& series, const PlotSpec& spec);

// Log axes when a column is positive and spans more than two decades.
PlotSpec default_plot_spec(const std::string& name, const Series& series);

}  // namespace beams
