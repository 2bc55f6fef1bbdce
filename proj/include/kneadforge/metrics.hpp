#pragma once

#include <string>
#include <vector>

#include "kneadforge/mesh_io.hpp"
#include "kneadforge/slicer.hpp"

namespace kneadforge {

// Lateral surface area of a layered cloud: consecutive rings joined into
// quads, each split into two triangles. End caps are not included.
double ring_mesh_area(const LayeredContourCloud& cloud);

// massOut / massIn.
double utilization(double mass_in, double mass_out);

// Largest per-part material loss considered normal; larger losses get
// flagged in reports.
inline constexpr double kMaxExpectedLossGrams = 5.0;

enum class Stars { ns, one, two, three, four };
std::string stars_label(Stars s);

struct ErrorStats {
    double mean_nn_a = 0.0;    // mean nearest-neighbor distance, first cloud
    double mean_nn_b = 0.0;
    double median_nn_a = 0.0;
    double median_nn_b = 0.0;
    double u_statistic = 0.0;  // Mann-Whitney U of the first sample
    double p_value = 1.0;      // two-sided, normal approximation with tie correction
    Stars stars = Stars::ns;
};

// Two-sample Mann-Whitney U on the nearest-neighbor distance distributions of
// two clouds against a common target.
ErrorStats error_distribution(const PointCloud& cloud_a, const PointCloud& cloud_b, const PointCloud& target);

// The test itself, exposed for direct use on any two samples.
struct MannWhitneyResult {
    double u = 0.0;
    double p_value = 1.0;
};
MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a, const std::vector<double>& sample_b);

Stars stars_from_p(double p);

}  // namespace kneadforge
