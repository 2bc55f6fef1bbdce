#pragma once

#include <optional>
#include <vector>

#include "kneadforge/kdtree.hpp"
#include "kneadforge/mesh_io.hpp"

namespace kneadforge {

struct RegistrationResult {
    RigidTransform transform;
    double fitness = 0.0;    // matched source fraction at the threshold
    double rmse = 0.0;       // over matched pairs; +inf when nothing matches
    double threshold = 0.0;
    int iterations = 0;
};

struct RegistrationCurve {
    struct Sample {
        double threshold = 0.0;
        double fitness = 0.0;
        double rmse = 0.0;
    };
    std::vector<Sample> samples;
    double compensation_value = 0.0;      // rmse at the first fitness-1.0 threshold
    double convergence_threshold = 0.0;   // that threshold
    bool complete = false;                // fitness 1.0 reached within the grid

    std::string to_csv() const;
};

class RegistrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Point-to-point ICP: nearest-neighbor correspondences capped at the
// threshold, best-fit rigid motion from the cross-covariance SVD each
// iteration, stopping on rmse improvement < tol or max_iterations. When no
// initial transform is given the clouds are pre-aligned by centroid and
// principal axes.
RegistrationResult icp(const PointCloud& source, const PointCloud& target, double threshold,
                       int max_iterations = 50, double tol = 1e-10,
                       const std::optional<RigidTransform>& initial = std::nullopt);

// Same, with a prebuilt target tree (shared across a sweep).
RegistrationResult icp(const PointCloud& source, const KdTree3& target_tree, double threshold,
                       int max_iterations = 50, double tol = 1e-10,
                       const std::optional<RigidTransform>& initial = std::nullopt);

// Threshold sweep, each registration warm-started from the previous one; the
// compensation value is the rmse at the first threshold reaching fitness 1.0.
RegistrationCurve sweep(const PointCloud& source, const PointCloud& target, const std::vector<double>& thresholds);

std::vector<double> make_threshold_grid(double start = 0.1, double stop = 20.0, double step = 0.1);

// Radial inward offset about the per-layer centroid axis: r' = max(r - value, 0),
// z unchanged. Layers come from the layer column when present, else from
// grouping equal z values.
PointCloud compensate(const PointCloud& cloud, double value);

// Best-fit rigid motion mapping the point pairs src[i] -> dst[i] (Kabsch).
RigidTransform kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

// Per-point nearest-neighbor distances to a target cloud.
std::vector<double> nearest_distances(const PointCloud& cloud, const PointCloud& target);

// max over cloud points of the distance to the target (directed Hausdorff).
double directed_hausdorff(const PointCloud& cloud, const PointCloud& target);

}  // namespace kneadforge
