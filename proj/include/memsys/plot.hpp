#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "memsys/core.hpp"

namespace memsys {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (objective 0, objective 1)
};

// Affine map applied per axis before plotting.
struct AxisScale {
    double offset = 0.0;
    double scale = 1.0;

    double apply(double v) const { return (v - offset) * scale; }
};

// With a baseline series: both axes normalized so the baseline spans [0, 1];
// points better than the baseline minimum legitimately map below 0. Without
// one: identity.
inline std::pair<AxisScale, AxisScale> compute_axis_scales(const std::vector<PlotSeries>& series,
                                                           int baseline_index) {
    if (baseline_index < 0) return {AxisScale{}, AxisScale{}};
    const PlotSeries& base = series[static_cast<std::size_t>(baseline_index)];
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& [x, y] : base.points) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    auto make = [](double lo, double hi) {
        return AxisScale{lo, (hi > lo) ? 1.0 / (hi - lo) : 1.0};
    };
    return {make(xmin, xmax), make(ymin, ymax)};
}

namespace detail {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

inline double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r <= 1.0) return mag;
    if (r <= 2.0) return 2.0 * mag;
    if (r <= 2.5) return 2.5 * mag;
    if (r <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

inline std::string marker_svg(std::size_t shape, double x, double y, const std::string& color) {
    std::ostringstream out;
    switch (shape % 5) {
        case 0:
            out << "<circle cx='" << fmt2(x) << "' cy='" << fmt2(y) << "' r='4' fill='" << color
                << "'/>";
            break;
        case 1:
            out << "<rect x='" << fmt2(x - 3.5) << "' y='" << fmt2(y - 3.5)
                << "' width='7' height='7' fill='" << color << "'/>";
            break;
        case 2:
            out << "<path d='M " << fmt2(x) << " " << fmt2(y - 4.5) << " L " << fmt2(x + 4.0) << " "
                << fmt2(y + 3.5) << " L " << fmt2(x - 4.0) << " " << fmt2(y + 3.5)
                << " Z' fill='" << color << "'/>";
            break;
        case 3:
            out << "<path d='M " << fmt2(x) << " " << fmt2(y - 5) << " L " << fmt2(x + 5) << " "
                << fmt2(y) << " L " << fmt2(x) << " " << fmt2(y + 5) << " L " << fmt2(x - 5) << " "
                << fmt2(y) << " Z' fill='" << color << "'/>";
            break;
        default:
            out << "<path d='M " << fmt2(x - 4) << " " << fmt2(y - 4) << " L " << fmt2(x + 4) << " "
                << fmt2(y + 4) << " M " << fmt2(x - 4) << " " << fmt2(y + 4) << " L " << fmt2(x + 4)
                << " " << fmt2(y - 4) << "' stroke='" << color << "' stroke-width='2'/>";
            break;
    }
    return out.str();
}

}  // namespace detail

// Standalone SVG scatter of the first two objectives. One marker shape and
// color per series, legend included; axes carry the applied normalization.
inline std::string render_scatter_svg(const std::vector<PlotSeries>& series, int baseline_index,
                                      const std::string& x_label, const std::string& y_label) {
    const auto [sx, sy] = compute_axis_scales(series, baseline_index);

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, sx.apply(x));
            xmax = std::max(xmax, sx.apply(x));
            ymin = std::min(ymin, sy.apply(y));
            ymax = std::max(ymax, sy.apply(y));
        }
    }
    if (!(xmax > xmin)) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (!(ymax > ymin)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    const double px0 = 70, py0 = 40, pw = 560, ph = 520;
    auto to_px = [&](double v) { return px0 + (v - xmin) / (xmax - xmin) * pw; };
    auto to_py = [&](double v) { return py0 + ph - (v - ymin) / (ymax - ymin) * ph; };

    static const char* kColors[5] = {"#cc4422", "#2266cc", "#22aa55", "#8844cc", "#886611"};

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='860' height='620' "
           "viewBox='0 0 860 620'>\n";
    out << "<rect width='860' height='620' fill='white'/>\n";
    out << "<rect x='" << px0 << "' y='" << py0 << "' width='" << pw << "' height='" << ph
        << "' fill='none' stroke='#333'/>\n";

    const double xstep = detail::nice_step(xmax - xmin);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12; t += xstep) {
        const double x = to_px(t);
        out << "<line x1='" << detail::fmt2(x) << "' y1='" << py0 << "' x2='" << detail::fmt2(x)
            << "' y2='" << py0 + ph << "' stroke='#ddd'/>\n";
        out << "<text x='" << detail::fmt2(x) << "' y='" << py0 + ph + 20
            << "' font-family='sans-serif' font-size='12' text-anchor='middle'>"
            << detail::fmt_tick(t) << "</text>\n";
    }
    const double ystep = detail::nice_step(ymax - ymin);
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12; t += ystep) {
        const double y = to_py(t);
        out << "<line x1='" << px0 << "' y1='" << detail::fmt2(y) << "' x2='" << px0 + pw
            << "' y2='" << detail::fmt2(y) << "' stroke='#ddd'/>\n";
        out << "<text x='" << px0 - 8 << "' y='" << detail::fmt2(y + 4)
            << "' font-family='sans-serif' font-size='12' text-anchor='end'>"
            << detail::fmt_tick(t) << "</text>\n";
    }

    const std::string x_title =
        baseline_index >= 0 ? x_label + " (baseline-normalized)" : x_label;
    const std::string y_title =
        baseline_index >= 0 ? y_label + " (baseline-normalized)" : y_label;
    out << "<text x='" << px0 + pw / 2 << "' y='608' font-family='sans-serif' font-size='14' "
           "text-anchor='middle'>"
        << x_title << "</text>\n";
    out << "<text x='16' y='" << py0 + ph / 2
        << "' font-family='sans-serif' font-size='14' text-anchor='middle' "
           "transform='rotate(-90 16 "
        << py0 + ph / 2 << ")'>" << y_title << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const std::string color = kColors[si % 5];
        for (const auto& [x, y] : series[si].points)
            out << detail::marker_svg(si, to_px(sx.apply(x)), to_py(sy.apply(y)), color) << "\n";
    }

    const double lx = px0 + pw + 20;
    double ly = py0 + 10;
    out << "<text x='" << lx << "' y='" << ly - 2
        << "' font-family='sans-serif' font-size='13' font-weight='bold'>Fronts</text>\n";
    ly += 16;
    for (std::size_t si = 0; si < series.size(); ++si) {
        out << detail::marker_svg(si, lx + 6, ly - 4, kColors[si % 5]) << "\n";
        out << "<text x='" << lx + 18 << "' y='" << ly
            << "' font-family='sans-serif' font-size='12'>" << series[si].label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace memsys
