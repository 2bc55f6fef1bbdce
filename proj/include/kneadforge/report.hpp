#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kneadforge {

struct PlotRange {
    double lo = 0.0;
    double hi = 1.0;
};

// Data range padded by the given margin fraction on both sides; degenerate
// ranges get a unit pad so the plot stays usable.
PlotRange padded_range(double min_value, double max_value, double margin = 0.05);

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

// Minimal deterministic SVG 1.1 line plot: fixed canvas, axes with tick
// labels, one polyline per series, optional horizontal reference rule.
struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    std::optional<double> horizontal_rule;
    std::string rule_label;

    std::string to_svg() const;
};

std::string area_series_csv(const std::vector<std::pair<int, double>>& series);

}  // namespace kneadforge
