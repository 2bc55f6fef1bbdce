#pragma once

#include <optional>
#include <vector>

#include "kneadforge/geometry.hpp"
#include "kneadforge/mesh_io.hpp"

namespace kneadforge {

struct PolarSample {
    double r = 0.0;      // mm, about the layer center
    double theta = 0.0;  // radians in (-pi, pi]
};

// One slice: uniformly resampled convex contour in polar form about the
// layer's hull centroid.
struct ContourLayer {
    double z = 0.0;
    Vec2 center;                       // hull centroid in world XY
    std::vector<PolarSample> samples;  // CCW, anchored at theta ~ 0
    double perimeter = 0.0;            // hull perimeter

    Vec2 world_xy(size_t i) const {
        const PolarSample& s = samples[i];
        return {center.x + s.r * std::cos(s.theta), center.y + s.r * std::sin(s.theta)};
    }
    Vec3 world_point(size_t i) const {
        Vec2 p = world_xy(i);
        return {p.x, p.y, z};
    }
};

struct LayeredContourCloud {
    std::vector<ContourLayer> layers;

    size_t samples_per_layer() const { return layers.empty() ? 0 : layers.front().samples.size(); }
    PointCloud to_point_cloud() const;
    double min_z() const { return layers.front().z; }
    double max_z() const { return layers.back().z; }
};

// Raw intersection points of one slicing plane with the mesh. An empty
// interior layer marks a mesh gap; it is flagged rather than fatal.
struct RawLayer {
    double z = 0.0;
    std::vector<Vec2> points;
    bool empty_interior = false;
};

class SlicerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Plane sweep from min-z to max-z at layer_step. Edges crossing a plane with
// a strict sign change are interpolated; vertices on it (within 1e-9 mm,
// snapped) contribute themselves.
std::vector<RawLayer> slice_mesh(const TriangleMesh& mesh, double layer_step = 0.1);

// Andrew monotone chain; returns CCW hull vertices, interior points dropped.
// Throws SlicerError if all points are collinear.
std::vector<Vec2> hull_layer(const std::vector<Vec2>& points);

// Resamples a closed CCW polygon into n points at equal arc-length spacing
// d = L/n, anchored at the boundary point on the theta=0 ray from the
// polygon centroid. Output polar coordinates are about that centroid.
ContourLayer resample_contour(const std::vector<Vec2>& polygon, double z, size_t n = 400);

// Full slicing pipeline: slice, hull and resample every layer.
LayeredContourCloud slice_to_contours(const TriangleMesh& mesh, double layer_step = 0.1, size_t points_per_layer = 400);

// Rebuilds the layered structure from a layer-annotated point cloud (the CSV
// round-trip path used between CLI stages).
LayeredContourCloud contours_from_point_cloud(const PointCloud& cloud);

double polygon_area(const std::vector<Vec2>& polygon);
Vec2 polygon_centroid(const std::vector<Vec2>& polygon);
double polygon_perimeter(const std::vector<Vec2>& polygon);

}  // namespace kneadforge
