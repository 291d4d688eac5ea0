#pragma once

// Minimal SVG line charts for the exported plot data.
//
// Viewport mapping: a data point (x, y) inside the data box
// [x_min, x_max] x [y_min, y_max] lands at pixel
//   px = margin + (x - x_min) / (x_max - x_min) * (width  - 2 margin)
//   py = margin + (y_max - y) / (y_max - y_min) * (height - 2 margin)
// so the data box fills the plot area exactly and y grows upward. The data box
// is the tight bounding box of all series (a degenerate side is widened by 1
// on each end) and is recorded on the root element as data-x-min,
// data-x-max, data-y-min, data-y-max so a rendering can be mapped back.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "seaice/errors.hpp"

namespace seaice::plots {

struct Viewport {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    double width = 640.0, height = 480.0, margin = 40.0;

    [[nodiscard]] double px(double x) const { return margin + (x - x_min) / (x_max - x_min) * (width - 2 * margin); }
    [[nodiscard]] double py(double y) const { return margin + (y_max - y) / (y_max - y_min) * (height - 2 * margin); }
    [[nodiscard]] double data_x(double px_) const { return x_min + (px_ - margin) / (width - 2 * margin) * (x_max - x_min); }
    [[nodiscard]] double data_y(double py_) const { return y_max - (py_ - margin) / (height - 2 * margin) * (y_max - y_min); }
};

struct Line {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool closed = false;  ///< drawn as a polygon (phase loops)
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Line> lines;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline Viewport fit_viewport(const Chart& c) {
    Viewport vp;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& l : c.lines) {
        if (l.x.size() != l.y.size()) throw ContractError("chart line '" + l.name + "' has mismatched x/y");
        for (std::size_t i = 0; i < l.x.size(); ++i) {
            if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
            x0 = std::min(x0, l.x[i]);
            x1 = std::max(x1, l.x[i]);
            y0 = std::min(y0, l.y[i]);
            y1 = std::max(y1, l.y[i]);
        }
    }
    if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0;
    if (!(y0 <= y1)) y0 = 0.0, y1 = 1.0;
    if (x0 == x1) x0 -= 1.0, x1 += 1.0;
    if (y0 == y1) y0 -= 1.0, y1 += 1.0;
    vp.x_min = x0;
    vp.x_max = x1;
    vp.y_min = y0;
    vp.y_max = y1;
    return vp;
}

[[nodiscard]] inline std::string render_svg(const Chart& c) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    const auto vp = fit_viewport(c);
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(vp.width) + "\" height=\"" +
         detail::num(vp.height) + "\" viewBox=\"0 0 " + detail::num(vp.width) + " " + detail::num(vp.height) +
         "\" data-x-min=\"" + detail::num(vp.x_min) + "\" data-x-max=\"" + detail::num(vp.x_max) +
         "\" data-y-min=\"" + detail::num(vp.y_min) + "\" data-y-max=\"" + detail::num(vp.y_max) +
         "\" data-margin=\"" + detail::num(vp.margin) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<rect x=\"" + detail::num(vp.margin) + "\" y=\"" + detail::num(vp.margin) + "\" width=\"" +
         detail::num(vp.width - 2 * vp.margin) + "\" height=\"" + detail::num(vp.height - 2 * vp.margin) +
         "\" fill=\"none\" stroke=\"#888\"/>\n";
    s += "<text x=\"" + detail::num(vp.width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::escape(c.title) + "</text>\n";
    s += "<text x=\"" + detail::num(vp.width / 2) + "\" y=\"" + detail::num(vp.height - 8) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + detail::escape(c.x_label) + " [" + detail::num(vp.x_min) +
         ", " + detail::num(vp.x_max) + "]</text>\n";
    s += "<text x=\"12\" y=\"" + detail::num(vp.height / 2) + "\" font-size=\"11\" transform=\"rotate(-90 12 " +
         detail::num(vp.height / 2) + ")\" text-anchor=\"middle\">" + detail::escape(c.y_label) + " [" +
         detail::num(vp.y_min) + ", " + detail::num(vp.y_max) + "]</text>\n";
    for (std::size_t li = 0; li < c.lines.size(); ++li) {
        const auto& l = c.lines[li];
        std::string pts;
        for (std::size_t i = 0; i < l.x.size(); ++i) {
            if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
            if (!pts.empty()) pts += ' ';
            pts += detail::num(vp.px(l.x[i])) + "," + detail::num(vp.py(l.y[i]));
        }
        s += std::string("<") + (l.closed ? "polygon" : "polyline") + " data-name=\"" + detail::escape(l.name) +
             "\" fill=\"none\" stroke=\"" + palette[li % std::size(palette)] + "\" stroke-width=\"1\" points=\"" + pts +
             "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace seaice::plots
