#pragma once

#include <string>
#include <utility>
#include <vector>

namespace icq {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    // horizontal reference lines (label, y value)
    std::vector<std::pair<std::string, double>> ref_lines;
};

/// Static line chart with axes, ticks and a legend. Output depends only on
/// the inputs (no timestamps), so identical calls yield identical bytes.
std::string render_line_chart(const std::vector<Series>& series, const PlotOptions& opts);

}  // namespace icq
