#include "rlpt/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rlpt::report {

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out.push_back(c);
    }
    return out;
}

struct Range {
    double lo = 0.0, hi = 1.0;
};

Range axis_range(const Panel& p, bool y_axis) {
    Range r{std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
    const bool log_axis = y_axis ? p.log_y : p.log_x;
    for (const auto& s : p.series)
        for (const auto& [x, y] : s.points) {
            const double v = y_axis ? y : x;
            if (log_axis && v <= 0.0)
                throw std::invalid_argument("log axis needs positive values");
            const double t = log_axis ? std::log10(v) : v;
            r.lo = std::min(r.lo, t);
            r.hi = std::max(r.hi, t);
        }
    if (!std::isfinite(r.lo)) return {0.0, 1.0};
    if (r.hi - r.lo < 1e-12) {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    return r;
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int panel_width,
                       int panel_height) {
    if (panels.empty()) throw std::invalid_argument("render_svg: no panels");
    const int margin_l = 56, margin_r = 14, margin_t = 30, margin_b = 42;
    const int width = panel_width * static_cast<int>(panels.size());
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(panel_height) +
           "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const Panel& p = panels[pi];
        const double x0 = static_cast<double>(panel_width) * pi + margin_l;
        const double y0 = margin_t;
        const double pw = panel_width - margin_l - margin_r;
        const double ph = panel_height - margin_t - margin_b;
        const Range xr = axis_range(p, false), yr = axis_range(p, true);

        auto px = [&](double x) {
            const double t = p.log_x ? std::log10(x) : x;
            return x0 + (t - xr.lo) / (xr.hi - xr.lo) * pw;
        };
        auto py = [&](double y) {
            const double t = p.log_y ? std::log10(y) : y;
            return y0 + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph;
        };

        svg += "<g>\n";
        svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(pw) +
               "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + fmt(x0 + pw / 2) + "\" y=\"" + fmt(y0 - 10) +
               "\" text-anchor=\"middle\" font-weight=\"bold\">" + esc(p.title) +
               "</text>\n";
        svg += "<text x=\"" + fmt(x0 + pw / 2) + "\" y=\"" +
               fmt(y0 + ph + 30) + "\" text-anchor=\"middle\">" + esc(p.x_label) +
               "</text>\n";
        svg += "<text x=\"" + fmt(x0 - 42) + "\" y=\"" + fmt(y0 + ph / 2) +
               "\" text-anchor=\"middle\" transform=\"rotate(-90 " + fmt(x0 - 42) + " " +
               fmt(y0 + ph / 2) + ")\">" + esc(p.y_label) + "</text>\n";

        // axis endpoint labels
        auto axis_value = [&](double t, bool log_axis) {
            return log_axis ? std::pow(10.0, t) : t;
        };
        svg += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 + ph + 14) +
               "\" text-anchor=\"middle\">" + fmt(axis_value(xr.lo, p.log_x)) + "</text>\n";
        svg += "<text x=\"" + fmt(x0 + pw) + "\" y=\"" + fmt(y0 + ph + 14) +
               "\" text-anchor=\"middle\">" + fmt(axis_value(xr.hi, p.log_x)) + "</text>\n";
        svg += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y0 + ph) +
               "\" text-anchor=\"end\">" + fmt(axis_value(yr.lo, p.log_y)) + "</text>\n";
        svg += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y0 + 4) +
               "\" text-anchor=\"end\">" + fmt(axis_value(yr.hi, p.log_y)) + "</text>\n";

        for (std::size_t si = 0; si < p.series.size(); ++si) {
            const Series& s = p.series[si];
            const char* color = kColors[si % (sizeof kColors / sizeof *kColors)];
            if (s.points.size() > 1) {
                std::string pts;
                for (const auto& [x, y] : s.points) {
                    if (!pts.empty()) pts.push_back(' ');
                    pts += fmt(px(x)) + "," + fmt(py(y));
                }
                svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
            }
            if (s.markers)
                for (const auto& [x, y] : s.points)
                    svg += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
                           "\" r=\"2.5\" fill=\"" + std::string(color) + "\"/>\n";
            svg += "<text x=\"" + fmt(x0 + 8) + "\" y=\"" +
                   fmt(y0 + 14 + 13.0 * static_cast<double>(si)) + "\" fill=\"" +
                   std::string(color) + "\">" + esc(s.label) + "</text>\n";
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace rlpt::report
