// SPDX-License-Identifier: Apache-2.0
#include "ccm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ccm::svg {

namespace {

constexpr int kW = 720, kH = 480;
constexpr int kLeft = 70, kRight = 30, kTop = 50, kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string num_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Range {
    double lo = 0.0, hi = 1.0;
    double map(double v, double px_lo, double px_hi) const {
        const double f = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return px_lo + f * (px_hi - px_lo);
    }
};

Range pad(double lo, double hi) {
    if (!(hi > lo)) {
        const double c = std::isfinite(lo) ? lo : 0.0;
        return {c - 1.0, c + 1.0};
    }
    const double m = 0.05 * (hi - lo);
    return {lo - m, hi + m};
}

std::string frame(const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, const Range& xr, const Range& yr) {
    std::string s;
    s += "<rect x='" + std::to_string(kLeft) + "' y='" + std::to_string(kTop) +
         "' width='" + std::to_string(kW - kLeft - kRight) + "' height='" +
         std::to_string(kH - kTop - kBottom) +
         "' fill='none' stroke='#333' stroke-width='1'/>\n";
    s += "<text x='" + std::to_string(kW / 2) + "' y='28' text-anchor='middle' "
         "font-size='16' font-family='sans-serif'>" + escape(title) + "</text>\n";
    s += "<text x='" + std::to_string(kW / 2) + "' y='" + std::to_string(kH - 14) +
         "' text-anchor='middle' font-size='13' font-family='sans-serif'>" +
         escape(xlabel) + "</text>\n";
    s += "<text x='18' y='" + std::to_string(kH / 2) +
         "' text-anchor='middle' font-size='13' font-family='sans-serif' "
         "transform='rotate(-90 18 " + std::to_string(kH / 2) + ")'>" +
         escape(ylabel) + "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xr.lo + (xr.hi - xr.lo) * k / 4.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        const double px = xr.map(fx, kLeft, kW - kRight);
        const double py = yr.map(fy, kH - kBottom, kTop);
        s += "<text x='" + num(px) + "' y='" + std::to_string(kH - kBottom + 18) +
             "' text-anchor='middle' font-size='11' font-family='sans-serif'>" +
             num_tick(fx) + "</text>\n";
        s += "<text x='" + std::to_string(kLeft - 8) + "' y='" + num(py + 4) +
             "' text-anchor='end' font-size='11' font-family='sans-serif'>" +
             num_tick(fy) + "</text>\n";
        s += "<line x1='" + num(px) + "' y1='" + std::to_string(kH - kBottom) +
             "' x2='" + num(px) + "' y2='" + std::to_string(kH - kBottom + 4) +
             "' stroke='#333'/>\n";
        s += "<line x1='" + std::to_string(kLeft - 4) + "' y1='" + num(py) +
             "' x2='" + std::to_string(kLeft) + "' y2='" + num(py) +
             "' stroke='#333'/>\n";
    }
    return s;
}

}  // namespace

std::string line_plot(std::span<const Series> series, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (std::isfinite(x)) { xlo = std::min(xlo, x); xhi = std::max(xhi, x); }
            if (std::isfinite(y)) { ylo = std::min(ylo, y); yhi = std::max(yhi, y); }
        }
    const Range xr = pad(xlo, xhi), yr = pad(ylo, yhi);
    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                      std::to_string(kW) + "' height='" + std::to_string(kH) +
                      "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out += frame(title, xlabel, ylabel, xr, yr);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % 8];
        std::string pts;
        for (const auto& [x, y] : series[i].points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(xr.map(x, kLeft, kW - kRight)) + "," +
                   num(yr.map(y, kH - kBottom, kTop));
        }
        out += "<polyline points='" + pts + "' fill='none' stroke='" + color +
               "' stroke-width='1.6'/>\n";
        const int ly = kTop + 16 + static_cast<int>(i) * 16;
        out += "<line x1='" + std::to_string(kW - kRight - 150) + "' y1='" +
               std::to_string(ly - 4) + "' x2='" + std::to_string(kW - kRight - 130) +
               "' y2='" + std::to_string(ly - 4) + "' stroke='" + color +
               "' stroke-width='2'/>\n";
        out += "<text x='" + std::to_string(kW - kRight - 124) + "' y='" +
               std::to_string(ly) + "' font-size='11' font-family='sans-serif'>" +
               escape(series[i].label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string bar_chart(std::span<const std::pair<std::string, double>> bars,
                      const std::string& title, const std::string& ylabel) {
    double ylo = 0.0, yhi = -std::numeric_limits<double>::infinity();
    for (const auto& [_, v] : bars)
        if (std::isfinite(v)) yhi = std::max(yhi, v);
    const Range xr{0.0, static_cast<double>(bars.size())};
    const Range yr = pad(ylo, std::isfinite(yhi) ? yhi : 1.0);
    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                      std::to_string(kW) + "' height='" + std::to_string(kH) +
                      "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out += frame(title, "", ylabel, xr, yr);
    const double base = yr.map(0.0, kH - kBottom, kTop);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& [label, v] = bars[i];
        const double x0 = xr.map(static_cast<double>(i) + 0.15, kLeft, kW - kRight);
        const double x1 = xr.map(static_cast<double>(i) + 0.85, kLeft, kW - kRight);
        const double y = std::isfinite(v) ? yr.map(v, kH - kBottom, kTop) : base;
        out += "<rect x='" + num(x0) + "' y='" + num(std::min(y, base)) +
               "' width='" + num(x1 - x0) + "' height='" +
               num(std::abs(base - y)) + "' fill='" + kPalette[i % 8] + "'/>\n";
        out += "<text x='" + num((x0 + x1) / 2) + "' y='" +
               std::to_string(kH - kBottom + 18) +
               "' text-anchor='middle' font-size='10' font-family='sans-serif'>" +
               escape(label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ccm::svg
