#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rlpt::report {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool markers = true;  // draw circles at the data points
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

// Side-by-side panels, polyline per series plus circle markers. Coordinates
// are printed with two decimals, so output is byte-deterministic.
std::string render_svg(const std::vector<Panel>& panels, int panel_width = 380,
                       int panel_height = 300);

}  // namespace rlpt::report
