#pragma once

#include <string>
#include <vector>

namespace nemclock {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false; ///< points instead of a polyline
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

/// Minimal SVG line plot. Non-finite points (and non-positive ones on log
/// axes) are skipped and break the polyline.
[[nodiscard]] std::string render_svg(const PlotSpec& plot);

} // namespace nemclock
