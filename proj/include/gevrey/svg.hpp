#pragma once

// Static line charts from CSV columns. Output depends only on the input
// values, so a fixed CSV renders to identical bytes.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "gevrey/csv.hpp"
#include "gevrey/error.hpp"

namespace gevrey {

struct PlotOptions {
    bool log_y = false;
    int width = 720;
    int height = 440;
};

namespace detail {

inline std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace detail

/// columns[0] is x, the rest are drawn as polylines. Non-positive values are
/// dropped on a log axis.
inline std::string render_svg(const CsvTable& table, const std::vector<std::string>& columns, const PlotOptions& opt = {}) {
    require(columns.size() >= 2, ErrorCode::Config, "plot needs an x column and at least one y column");
    std::vector<std::size_t> idx;
    for (const auto& c : columns) idx.push_back(table.column(c));

    const double left = 70, right = 20 + 120, top = 20, bottom = 40;
    const double pw = opt.width - left - right, ph = opt.height - top - bottom;

    auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
    auto usable = [&](double v) { return std::isfinite(v) && (!opt.log_y || v > 0); };

    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& row : table.rows) {
        if (!std::isfinite(row[idx[0]])) continue;
        for (std::size_t c = 1; c < idx.size(); ++c) {
            const double v = row[idx[c]];
            if (!usable(v)) continue;
            x0 = std::min(x0, row[idx[0]]);
            x1 = std::max(x1, row[idx[0]]);
            y0 = std::min(y0, ty(v));
            y1 = std::max(y1, ty(v));
        }
    }
    require(std::isfinite(x0) && std::isfinite(y0), ErrorCode::Domain, "nothing to plot");
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

    using detail::fixed;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw) << "\" height=\""
       << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Axis extremes only; a log axis is labelled in the original units.
    auto ylab = [&](double v) { return detail::label(opt.log_y ? std::pow(10.0, v) : v); };
    os << "<text x=\"" << fixed(left - 4) << "\" y=\"" << fixed(top + 4) << "\" text-anchor=\"end\">" << ylab(y1)
       << "</text>\n";
    os << "<text x=\"" << fixed(left - 4) << "\" y=\"" << fixed(top + ph) << "\" text-anchor=\"end\">" << ylab(y0)
       << "</text>\n";
    os << "<text x=\"" << fixed(left) << "\" y=\"" << fixed(top + ph + 16) << "\" text-anchor=\"middle\">"
       << detail::label(x0) << "</text>\n";
    os << "<text x=\"" << fixed(left + pw) << "\" y=\"" << fixed(top + ph + 16) << "\" text-anchor=\"middle\">"
       << detail::label(x1) << "</text>\n";
    os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(top + ph + 32) << "\" text-anchor=\"middle\">"
       << columns[0] << "</text>\n";

    for (std::size_t c = 1; c < idx.size(); ++c) {
        const char* color = detail::palette[(c - 1) % std::size(detail::palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& row : table.rows) {
            const double x = row[idx[0]], y = row[idx[c]];
            if (!std::isfinite(x) || !usable(y)) continue;
            os << (first ? "" : " ") << fixed(px(x)) << "," << fixed(py(y));
            first = false;
        }
        os << "\"/>\n";
        const double ly = top + 14.0 * static_cast<double>(c);
        os << "<line x1=\"" << fixed(left + pw + 10) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + pw + 28)
           << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << fixed(left + pw + 32) << "\" y=\"" << fixed(ly + 4) << "\">" << columns[c] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace gevrey
