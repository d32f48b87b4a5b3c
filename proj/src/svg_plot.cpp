#include "icq/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace icq {

namespace {

constexpr int kWidth = 840;
constexpr int kHeight = 520;
constexpr int kLeft = 70, kRight = 180, kTop = 50, kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

}  // namespace

std::string render_line_chart(const std::vector<Series>& series, const PlotOptions& opts) {
    if (series.empty()) throw std::invalid_argument("render_line_chart: no series");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw std::invalid_argument("render_line_chart: empty or ragged series '" + s.label + "'");
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    for (const auto& [label, y] : opts.ref_lines) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"25\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << opts.title << "</text>\n";

    // axes
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
        << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + ph << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = xmin + (xmax - xmin) * i / 5.0;
        double fy = ymin + (ymax - ymin) * i / 5.0;
        svg << "<line x1=\"" << px(fx) << "\" y1=\"" << kTop + ph << "\" x2=\"" << px(fx)
            << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(fx) << "\" y=\"" << kTop + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
            << "</text>\n";
        svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << kLeft
            << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
            << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << opts.x_label
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << kTop + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << opts.y_label << "</text>\n";

    // reference lines
    for (std::size_t i = 0; i < opts.ref_lines.size(); ++i) {
        double y = py(opts.ref_lines[i].second);
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\""
            << y << "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";
    }

    // series
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (i) svg << " ";
            svg << num(px(series[si].x[i])) << "," << num(py(series[si].y[i]));
        }
        svg << "\"/>\n";
    }

    // legend
    double lx = kLeft + pw + 12, ly = kTop + 10;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << lx + 28 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[si].label << "</text>\n";
        ly += 18;
    }
    for (const auto& [label, yval] : opts.ref_lines) {
        svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly
            << "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";
        svg << "<text x=\"" << lx + 28 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
        ly += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace icq
