#include "kneadforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kneadforge/mesh_io.hpp"

namespace kneadforge {

PlotRange padded_range(double min_value, double max_value, double margin) {
    if (max_value < min_value)
        std::swap(min_value, max_value);
    double span = max_value - min_value;
    if (span <= 0.0)
        span = std::max(std::abs(max_value), 1.0);
    return {min_value - margin * span, max_value + margin * span};
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string fmt(double v) {
    // fixed short form for coordinates; keeps files byte-stable and small
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

const char* kDefaultColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string LinePlot::to_svg() const {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    bool first = true;
    for (const PlotSeries& s : series)
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y))
                continue;
            if (first) {
                x_min = x_max = x;
                y_min = y_max = y;
                first = false;
            } else {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    if (horizontal_rule) {
        y_min = std::min(y_min, *horizontal_rule);
        y_max = std::max(y_max, *horizontal_rule);
    }
    PlotRange xr = padded_range(x_min, x_max);
    PlotRange yr = padded_range(y_min, y_max);

    auto sx = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kMarginLeft - kMarginRight); };
    auto sy = [&](double y) { return kHeight - kMarginBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kMarginTop - kMarginBottom); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(kWidth) << "\" height=\"" << int(kHeight)
       << "\" viewBox=\"0 0 " << int(kWidth) << ' ' << int(kHeight) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << title << "</text>\n";

    // axes
    os << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(kHeight - kMarginBottom) << "\" x2=\""
       << fmt(kWidth - kMarginRight) << "\" y2=\"" << fmt(kHeight - kMarginBottom) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\"" << fmt(kMarginLeft)
       << "\" y2=\"" << fmt(kHeight - kMarginBottom) << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        double xv = xr.lo + (xr.hi - xr.lo) * double(i) / 5.0;
        double yv = yr.lo + (yr.hi - yr.lo) * double(i) / 5.0;
        os << "<line x1=\"" << fmt(sx(xv)) << "\" y1=\"" << fmt(kHeight - kMarginBottom) << "\" x2=\"" << fmt(sx(xv))
           << "\" y2=\"" << fmt(kHeight - kMarginBottom + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(kHeight - kMarginBottom + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_tick(xv) << "</text>\n";
        os << "<line x1=\"" << fmt(kMarginLeft - 5) << "\" y1=\"" << fmt(sy(yv)) << "\" x2=\"" << fmt(kMarginLeft)
           << "\" y2=\"" << fmt(sy(yv)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(sy(yv) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_tick(yv) << "</text>\n";
    }
    os << "<text x=\"" << fmt((kMarginLeft + kWidth - kMarginRight) / 2) << "\" y=\"" << fmt(kHeight - 12)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt((kMarginTop + kHeight - kMarginBottom) / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
       << fmt((kMarginTop + kHeight - kMarginBottom) / 2) << ")\">" << y_label << "</text>\n";

    if (horizontal_rule) {
        os << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(sy(*horizontal_rule)) << "\" x2=\""
           << fmt(kWidth - kMarginRight) << "\" y2=\"" << fmt(sy(*horizontal_rule))
           << "\" stroke=\"red\" stroke-dasharray=\"6 3\"/>\n";
        if (!rule_label.empty())
            os << "<text x=\"" << fmt(kWidth - kMarginRight - 4) << "\" y=\"" << fmt(sy(*horizontal_rule) - 5)
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"red\">" << rule_label
               << "</text>\n";
    }

    for (size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        std::string color = s.color.empty() ? kDefaultColors[si % 6] : s.color;
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y))
                continue;
            os << fmt(sx(x)) << ',' << fmt(sy(y)) << ' ';
        }
        os << "\"/>\n";
        if (!s.label.empty()) {
            double ly = kMarginTop + 16.0 * double(si);
            os << "<line x1=\"" << fmt(kWidth - kMarginRight - 120) << "\" y1=\"" << fmt(ly) << "\" x2=\""
               << fmt(kWidth - kMarginRight - 100) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
               << "\" stroke-width=\"1.5\"/>\n";
            os << "<text x=\"" << fmt(kWidth - kMarginRight - 95) << "\" y=\"" << fmt(ly + 4)
               << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string area_series_csv(const std::vector<std::pair<int, double>>& series) {
    std::ostringstream os;
    os << "cycle,area_mm2\n";
    for (const auto& [cycle, area] : series)
        os << cycle << ',' << format_double(area) << '\n';
    return os.str();
}

}  // namespace kneadforge
