// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ccm::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal static line plot: axes, ticks, one polyline per series, legend.
std::string line_plot(std::span<const Series> series, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel);

/// Vertical bar chart with one labelled bar per entry.
std::string bar_chart(std::span<const std::pair<std::string, double>> bars,
                      const std::string& title, const std::string& ylabel);

}  // namespace ccm::svg
