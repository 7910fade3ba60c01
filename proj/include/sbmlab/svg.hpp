#pragma once

#include <string>
#include <vector>

namespace sbm {

/// Minimal SVG line chart: one polyline per named series over a shared x
/// axis. Output is a standalone SVG document string.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::vector<SvgSeries>& series);

}  // namespace sbm
