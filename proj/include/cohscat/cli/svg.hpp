#pragma once

// Minimal SVG line and scatter plots for quick inspection of CSV outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace cohscat::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool scatter = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
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
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

inline std::string render_svg(const PlotSpec& plot) {
    constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
    if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };
    using detail::num;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kW / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::escape(plot.title) + "</text>\n";
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" + num(xv) +
             "</text>\n";
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
             "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kH - 10) + "\" text-anchor=\"middle\">" +
         detail::escape(plot.x_label) + "</text>\n";
    s += "<text transform=\"translate(16," + num(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::escape(plot.y_label) + "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& ser = plot.series[k];
        const std::string color = kColors[k % 6];
        if (ser.scatter) {
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (!std::isfinite(ser.y[i])) continue;
                s += "<circle cx=\"" + num(px(ser.x[i])) + "\" cy=\"" + num(py(ser.y[i])) + "\" r=\"2\" fill=\"" +
                     color + "\"/>\n";
            }
        } else {
            s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (!std::isfinite(ser.y[i])) continue;
                s += num(px(ser.x[i])) + "," + num(py(ser.y[i])) + " ";
            }
            s += "\"/>\n";
        }
        const double ly = kTop + 14 + 18 * static_cast<double>(k);
        s += "<rect x=\"" + num(kW - kRight + 12) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"3\" fill=\"" +
             color + "\"/>\n";
        s += "<text x=\"" + num(kW - kRight + 30) + "\" y=\"" + num(ly - 4) + "\">" + detail::escape(ser.name) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace cohscat::cli
