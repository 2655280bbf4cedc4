#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fpkit/vec.hpp"

namespace fpkit {

struct PlotSeries {
    std::string label;
    Vec x;
    Vec y;
};

struct PlotOptions {
    int width = 800;
    int height = 500;
    bool log_y = true;
    bool log_x = false;
    std::string title;
    std::string x_label = "iteration";
    std::string y_label;
};

namespace detail {

inline std::string fmt_fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace detail

/// Renders log-scale convergence curves as a standalone SVG. All numeric
/// output is fixed-format so identical inputs give identical bytes.
inline std::string render_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double ml = 70, mr = 20, mt = opt.title.empty() ? 20 : 40, mb = 50;
    const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;

    auto tx = [&](double v) { return opt.log_x ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return opt.log_y ? std::log10(std::max(v, 1e-300)) : v; };

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (opt.log_y && !(s.y[i] > 0.0)) continue;
            if (opt.log_x && !(s.x[i] > 0.0)) continue;
            double X = tx(s.x[i]), Y = ty(s.y[i]);
            if (!any) {
                xmin = xmax = X;
                ymin = ymax = Y;
                any = true;
            } else {
                xmin = std::min(xmin, X);
                xmax = std::max(xmax, X);
                ymin = std::min(ymin, Y);
                ymax = std::max(ymax, Y);
            }
        }
    }
    if (!any) { xmin = ymin = 0; xmax = ymax = 1; }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return mt + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
        << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
    svg << "<rect width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        svg << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << opt.title << "</text>\n";

    // frame
    svg << "<rect x=\"" << detail::fmt_fixed(ml) << "\" y=\"" << detail::fmt_fixed(mt)
        << "\" width=\"" << detail::fmt_fixed(pw) << "\" height=\"" << detail::fmt_fixed(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks: 5 per axis in transformed coordinates
    for (int k = 0; k <= 4; ++k) {
        double fx = xmin + (xmax - xmin) * k / 4.0;
        double fy = ymin + (ymax - ymin) * k / 4.0;
        double gx = ml + pw * k / 4.0;
        double gy = mt + ph - ph * k / 4.0;
        double vx = opt.log_x ? std::pow(10.0, fx) : fx;
        double vy = opt.log_y ? std::pow(10.0, fy) : fy;
        svg << "<line x1=\"" << detail::fmt_fixed(gx) << "\" y1=\"" << detail::fmt_fixed(mt + ph)
            << "\" x2=\"" << detail::fmt_fixed(gx) << "\" y2=\""
            << detail::fmt_fixed(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << detail::fmt_fixed(gx) << "\" y=\""
            << detail::fmt_fixed(mt + ph + 18) << "\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << detail::fmt_tick(vx)
            << "</text>\n";
        svg << "<line x1=\"" << detail::fmt_fixed(ml - 5) << "\" y1=\"" << detail::fmt_fixed(gy)
            << "\" x2=\"" << detail::fmt_fixed(ml) << "\" y2=\"" << detail::fmt_fixed(gy)
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << detail::fmt_fixed(ml - 8) << "\" y=\""
            << detail::fmt_fixed(gy + 4) << "\" text-anchor=\"end\" "
            << "font-family=\"sans-serif\" font-size=\"11\">"
            << (opt.log_y ? ("1e" + detail::fmt_tick(fy)) : detail::fmt_tick(vy)) << "</text>\n";
    }
    svg << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << opt.x_label
        << "</text>\n";
    if (!opt.y_label.empty())
        svg << "<text x=\"16\" y=\"" << mt + ph / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
            << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << opt.y_label << "</text>\n";

    std::size_t ci = 0;
    for (const auto& s : series) {
        const char* color = palette[ci % (sizeof(palette) / sizeof(palette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (opt.log_y && !(s.y[i] > 0.0)) continue;
            if (opt.log_x && !(s.x[i] > 0.0)) continue;
            if (!first) svg << ' ';
            svg << detail::fmt_fixed(px(s.x[i])) << ',' << detail::fmt_fixed(py(s.y[i]));
            first = false;
        }
        svg << "\"/>\n";
        double ly = mt + 16 + 16 * static_cast<double>(ci);
        svg << "<line x1=\"" << detail::fmt_fixed(ml + pw - 150) << "\" y1=\""
            << detail::fmt_fixed(ly - 4) << "\" x2=\"" << detail::fmt_fixed(ml + pw - 130)
            << "\" y2=\"" << detail::fmt_fixed(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << detail::fmt_fixed(ml + pw - 125) << "\" y=\""
            << detail::fmt_fixed(ly) << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << s.label << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    return svg.str();
}

inline void write_plot(const std::string& path, const std::vector<PlotSeries>& series,
                       const PlotOptions& opt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_plot: cannot open " + path);
    out << render_plot(series, opt);
}

}  // namespace fpkit
