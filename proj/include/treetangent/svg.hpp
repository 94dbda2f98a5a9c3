#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "treetangent/errors.hpp"
#include "treetangent/format.hpp"

namespace treetangent {

// Minimal standalone SVG line plots: a pure function of the plotted series,
// so a plot can always be regenerated from its CSV.

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title, x_label, y_label;
    bool log_x = false;
    bool log_y = false;
};

namespace detail_svg {

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v, bool logscale) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", logscale ? std::pow(10.0, v) : v);
    return buf;
}

}  // namespace detail_svg

inline std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const double width = 800, height = 480;
    const double ml = 70, mr = 160, mt = 40, mb = 50;

    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = tx(s.x[i]), y = ty(s.y[i]);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmin < xmax)) xmax = xmin + 1;
    if (!(ymin < ymax)) ymax = ymin + 1;

    auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (ty(y) - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail_svg::num(width) +
           "\" height=\"" + detail_svg::num(height) + "\" viewBox=\"0 0 " + detail_svg::num(width) +
           " " + detail_svg::num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + detail_svg::num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" + spec.title + "</text>\n";

    // axes
    out += "<line x1=\"" + detail_svg::num(ml) + "\" y1=\"" + detail_svg::num(height - mb) +
           "\" x2=\"" + detail_svg::num(width - mr) + "\" y2=\"" + detail_svg::num(height - mb) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + detail_svg::num(ml) + "\" y1=\"" + detail_svg::num(mt) + "\" x2=\"" +
           detail_svg::num(ml) + "\" y2=\"" + detail_svg::num(height - mb) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 4.0;
        const double fy = ymin + (ymax - ymin) * k / 4.0;
        const double gx = ml + (width - ml - mr) * k / 4.0;
        const double gy = height - mb - (height - mt - mb) * k / 4.0;
        out += "<text x=\"" + detail_svg::num(gx) + "\" y=\"" + detail_svg::num(height - mb + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail_svg::tick_label(fx, spec.log_x) + "</text>\n";
        out += "<text x=\"" + detail_svg::num(ml - 8) + "\" y=\"" + detail_svg::num(gy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail_svg::tick_label(fy, spec.log_y) + "</text>\n";
    }
    out += "<text x=\"" + detail_svg::num((ml + width - mr) / 2) + "\" y=\"" +
           detail_svg::num(height - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + spec.x_label +
           "</text>\n";
    out += "<text x=\"16\" y=\"" + detail_svg::num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
           detail_svg::num((mt + height - mb) / 2) + ")\">" + spec.y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(tx(s.x[i])) || !std::isfinite(ty(s.y[i]))) continue;
            pts += detail_svg::num(px(s.x[i])) + "," + detail_svg::num(py(s.y[i])) + " ";
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(detail_svg::palette(si)) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = mt + 16.0 * static_cast<double>(si);
        out += "<line x1=\"" + detail_svg::num(width - mr + 10) + "\" y1=\"" + detail_svg::num(ly) +
               "\" x2=\"" + detail_svg::num(width - mr + 30) + "\" y2=\"" + detail_svg::num(ly) +
               "\" stroke=\"" + detail_svg::palette(si) + "\" stroke-width=\"1.5\"/>\n";
        out += "<text x=\"" + detail_svg::num(width - mr + 34) + "\" y=\"" + detail_svg::num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void write_line_plot(const std::string& path, const PlotSpec& spec,
                            const std::vector<PlotSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("write_line_plot: cannot write '" + path + "'");
    out << render_line_plot(spec, series);
}

}  // namespace treetangent
