#include "kneadforge/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace kneadforge {

namespace {

constexpr double kPlaneSnap = 1e-9;

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

PointCloud LayeredContourCloud::to_point_cloud() const {
    PointCloud cloud;
    for (size_t li = 0; li < layers.size(); ++li) {
        const ContourLayer& layer = layers[li];
        for (size_t i = 0; i < layer.samples.size(); ++i) {
            cloud.points.push_back(layer.world_point(i));
            cloud.layer.push_back(int(li));
        }
    }
    return cloud;
}

std::vector<RawLayer> slice_mesh(const TriangleMesh& mesh, double layer_step) {
    if (mesh.triangles.empty())
        throw SlicerError("slice_mesh: empty mesh");
    if (layer_step <= 0.0)
        throw SlicerError("slice_mesh: layer step must be positive");
    mesh.validate();

    double zmin = mesh.vertices.front().z;
    double zmax = zmin;
    for (const Vec3& v : mesh.vertices) {
        zmin = std::min(zmin, v.z);
        zmax = std::max(zmax, v.z);
    }

    size_t layer_count = size_t(std::floor((zmax - zmin) / layer_step + 1e-9)) + 1;
    std::vector<RawLayer> layers(layer_count);
    for (size_t i = 0; i < layer_count; ++i)
        layers[i].z = zmin + double(i) * layer_step;

    // Each triangle only spans a contiguous band of planes.
    for (const auto& tri : mesh.triangles) {
        const Vec3 v[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
        double tz_min = std::min({v[0].z, v[1].z, v[2].z});
        double tz_max = std::max({v[0].z, v[1].z, v[2].z});
        long first = long(std::ceil((tz_min - zmin) / layer_step - 1e-9));
        long last = long(std::floor((tz_max - zmin) / layer_step + 1e-9));
        first = std::max(first, 0L);
        last = std::min(last, long(layer_count) - 1);
        for (long li = first; li <= last; ++li) {
            double h = layers[li].z;
            double d[3];
            for (int k = 0; k < 3; ++k) {
                d[k] = v[k].z - h;
                if (std::abs(d[k]) < kPlaneSnap)
                    d[k] = 0.0;  // snap onto the plane
            }
            auto& pts = layers[li].points;
            // vertices exactly on the plane contribute themselves once
            for (int k = 0; k < 3; ++k)
                if (d[k] == 0.0)
                    pts.push_back({v[k].x, v[k].y});
            // strict sign change across an edge: interpolate
            for (int k = 0; k < 3; ++k) {
                int m = (k + 1) % 3;
                if (d[k] * d[m] < 0.0) {
                    double t = (h - v[k].z) / (v[m].z - v[k].z);
                    pts.push_back({v[k].x + t * (v[m].x - v[k].x), v[k].y + t * (v[m].y - v[k].y)});
                }
            }
        }
    }

    for (size_t i = 0; i < layer_count; ++i)
        if (layers[i].points.empty())
            layers[i].empty_interior = (i != 0 && i + 1 != layer_count);
    return layers;
}

std::vector<Vec2> hull_layer(const std::vector<Vec2>& points) {
    if (points.size() < 3)
        throw SlicerError("hull_layer: need at least 3 points");
    std::vector<Vec2> pts = points;
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());

    size_t n = pts.size();
    if (n < 3)
        throw SlicerError("hull_layer: fewer than 3 distinct points");

    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {  // upper chain
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3)
        throw SlicerError("hull_layer: degenerate layer (collinear points)");
    return hull;
}

double polygon_area(const std::vector<Vec2>& polygon) {
    double a = 0.0;
    for (size_t i = 0; i < polygon.size(); ++i) {
        const Vec2& p = polygon[i];
        const Vec2& q = polygon[(i + 1) % polygon.size()];
        a += p.cross(q);
    }
    return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& polygon) {
    double a = 0.0;
    Vec2 c;
    for (size_t i = 0; i < polygon.size(); ++i) {
        const Vec2& p = polygon[i];
        const Vec2& q = polygon[(i + 1) % polygon.size()];
        double w = p.cross(q);
        a += w;
        c.x += (p.x + q.x) * w;
        c.y += (p.y + q.y) * w;
    }
    if (std::abs(a) < 1e-30)
        throw SlicerError("polygon_centroid: zero-area polygon");
    return {c.x / (3.0 * a), c.y / (3.0 * a)};
}

double polygon_perimeter(const std::vector<Vec2>& polygon) {
    double l = 0.0;
    for (size_t i = 0; i < polygon.size(); ++i)
        l += (polygon[(i + 1) % polygon.size()] - polygon[i]).norm();
    return l;
}

ContourLayer resample_contour(const std::vector<Vec2>& polygon, double z, size_t n) {
    if (polygon.size() < 3)
        throw SlicerError("resample_contour: need a closed polygon");
    if (n < 3)
        throw SlicerError("resample_contour: need at least 3 samples");
    double perimeter = polygon_perimeter(polygon);
    if (perimeter <= 0.0)
        throw SlicerError("resample_contour: zero perimeter");
    Vec2 center = polygon_centroid(polygon);

    const size_t m = polygon.size();
    // Anchor: the boundary point on the theta=0 ray from the centroid, i.e.
    // the crossing of y = center.y with x > center.x. Unique for a convex
    // polygon with the centroid inside.
    // Upward-crossing rule: the CCW boundary crosses the +x ray exactly once
    // with y going from <= 0 to > 0; vertices on the ray land on one edge.
    size_t anchor_edge = 0;
    double anchor_t = 0.0;
    bool found = false;
    for (size_t i = 0; i < m; ++i) {
        Vec2 a = polygon[i] - center;
        Vec2 b = polygon[(i + 1) % m] - center;
        if (!(a.y <= 0.0 && b.y > 0.0))
            continue;
        double t = -a.y / (b.y - a.y);
        double x = a.x + t * (b.x - a.x);
        if (x > 0.0) {
            anchor_edge = i;
            anchor_t = t;
            found = true;
            break;
        }
    }
    if (!found)
        throw SlicerError("resample_contour: centroid ray misses the boundary");

    // Walk the polygon CCW from the anchor, emitting a point every L/n.
    ContourLayer layer;
    layer.z = z;
    layer.center = center;
    layer.perimeter = perimeter;
    layer.samples.reserve(n);

    double step = perimeter / double(n);
    size_t edge = anchor_edge;
    Vec2 ea = polygon[edge];
    Vec2 eb = polygon[(edge + 1) % m];
    double edge_len = (eb - ea).norm();
    double pos_on_edge = anchor_t * edge_len;

    auto emit = [&](const Vec2& p) {
        Vec2 rel = p - center;
        layer.samples.push_back({rel.norm(), std::atan2(rel.y, rel.x)});
    };

    emit(ea + (eb - ea) * (edge_len > 0.0 ? pos_on_edge / edge_len : 0.0));
    double remaining = step;
    for (size_t emitted = 1; emitted < n;) {
        double avail = edge_len - pos_on_edge;
        if (avail >= remaining) {
            pos_on_edge += remaining;
            emit(ea + (eb - ea) * (edge_len > 0.0 ? pos_on_edge / edge_len : 0.0));
            remaining = step;
            ++emitted;
        } else {
            remaining -= avail;
            edge = (edge + 1) % m;
            ea = polygon[edge];
            eb = polygon[(edge + 1) % m];
            edge_len = (eb - ea).norm();
            pos_on_edge = 0.0;
        }
    }
    return layer;
}

LayeredContourCloud slice_to_contours(const TriangleMesh& mesh, double layer_step, size_t points_per_layer) {
    std::vector<RawLayer> raw = slice_mesh(mesh, layer_step);
    LayeredContourCloud cloud;
    for (const RawLayer& rl : raw) {
        if (rl.points.empty())
            continue;  // flagged gap or boundary plane with no footprint
        std::vector<Vec2> hull;
        try {
            hull = hull_layer(rl.points);
        } catch (const SlicerError&) {
            continue;  // degenerate cap slice (single edge/point)
        }
        cloud.layers.push_back(resample_contour(hull, rl.z, points_per_layer));
    }
    if (cloud.layers.empty())
        throw SlicerError("slice_to_contours: no usable layers");
    return cloud;
}

LayeredContourCloud contours_from_point_cloud(const PointCloud& cloud) {
    if (!cloud.has_layers())
        throw SlicerError("contours_from_point_cloud: cloud has no layer column");
    std::map<int, std::vector<Vec2>> by_layer;
    std::map<int, double> layer_z;
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        by_layer[cloud.layer[i]].push_back(cloud.points[i].xy());
        layer_z[cloud.layer[i]] = cloud.points[i].z;
    }
    LayeredContourCloud out;
    for (auto& [idx, pts] : by_layer) {
        if (pts.size() < 3)
            throw SlicerError("contours_from_point_cloud: layer " + std::to_string(idx) + " has <3 points");
        ContourLayer layer;
        layer.z = layer_z[idx];
        layer.center = polygon_centroid(pts);
        layer.perimeter = polygon_perimeter(pts);
        layer.samples.reserve(pts.size());
        for (const Vec2& p : pts) {
            Vec2 rel = p - layer.center;
            layer.samples.push_back({rel.norm(), std::atan2(rel.y, rel.x)});
        }
        out.layers.push_back(std::move(layer));
    }
    std::sort(out.layers.begin(), out.layers.end(),
              [](const ContourLayer& a, const ContourLayer& b) { return a.z < b.z; });
    return out;
}

}  // namespace kneadforge
