#include <doctest.h>

#include <algorithm>
#include <random>

#include "kneadforge/shapes.hpp"
#include "kneadforge/slicer.hpp"

using namespace kneadforge;

namespace {

TriangleMesh single_triangle(Vec3 a, Vec3 b, Vec3 c) {
    TriangleMesh mesh;
    mesh.vertices = {a, b, c};
    mesh.triangles = {{0, 1, 2}};
    return mesh;
}

// O(n^2) containment oracle: point-in-convex-polygon by sign of every edge
// cross product.
bool inside_hull(const std::vector<Vec2>& hull, const Vec2& p, double eps = 1e-9) {
    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        if ((b - a).cross(p - a) < -eps)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("plane slices a triangle at edge midpoints") {
    TriangleMesh mesh = single_triangle({0, 0, 0}, {1, 0, 1}, {0, 1, 1});
    std::vector<RawLayer> layers = slice_mesh(mesh, 0.5);
    REQUIRE(layers.size() == 3);
    const RawLayer& mid = layers[1];
    REQUIRE(mid.points.size() == 2);
    bool found_a = false, found_b = false;
    for (const Vec2& p : mid.points) {
        if (std::abs(p.x - 0.5) < 1e-12 && std::abs(p.y) < 1e-12)
            found_a = true;
        if (std::abs(p.x) < 1e-12 && std::abs(p.y - 0.5) < 1e-12)
            found_b = true;
    }
    CHECK(found_a);
    CHECK(found_b);
}

TEST_CASE("interior layers of a unit cube hull to the unit square") {
    TriangleMesh cube = shape_to_mesh(SquarePrism{1.0, 1.0}, 4, 1.0);
    std::vector<RawLayer> layers = slice_mesh(cube, 0.1);
    CHECK(layers.size() == 11);
    for (size_t i = 1; i + 1 < layers.size(); ++i) {
        std::vector<Vec2> hull = hull_layer(layers[i].points);
        REQUIRE(hull.size() == 4);
        for (const Vec2& v : hull) {
            CHECK(std::abs(std::abs(v.x) - 0.5) < 1e-9);
            CHECK(std::abs(std::abs(v.y) - 0.5) < 1e-9);
        }
    }
}

TEST_CASE("sliced cylinder mesh stays within the tessellation sagitta of the true radius") {
    size_t segments = 128;
    TriangleMesh mesh = shape_to_mesh(Cylinder{60.0, 40.0}, segments, 2.0);
    double sagitta = 30.0 * (1.0 - std::cos(kPi / double(segments)));
    std::vector<RawLayer> layers = slice_mesh(mesh, 1.0);
    for (const RawLayer& layer : layers) {
        REQUIRE_FALSE(layer.points.empty());
        std::vector<Vec2> hull = hull_layer(layer.points);
        for (const Vec2& p : hull) {
            CHECK(p.norm() <= 30.0 + 1e-9);
            CHECK(p.norm() >= 30.0 - sagitta - 1e-9);
        }
    }
}

TEST_CASE("hull drops interior points") {
    std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    std::vector<Vec2> hull = hull_layer(pts);
    CHECK(hull.size() == 4);
}

TEST_CASE("hull of 1000 random disc points contains every input point") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vec2> pts;
    while (pts.size() < 1000) {
        Vec2 p{unit(rng), unit(rng)};
        if (p.norm() <= 1.0)
            pts.push_back(p);
    }
    std::vector<Vec2> hull = hull_layer(pts);
    // hull vertices are input points
    for (const Vec2& h : hull)
        CHECK(std::count_if(pts.begin(), pts.end(),
                            [&](const Vec2& p) { return p.x == h.x && p.y == h.y; }) > 0);
    // all inputs inside the hull (O(n^2) oracle)
    for (const Vec2& p : pts)
        CHECK(inside_hull(hull, p));
}

TEST_CASE("regular 400-gon is kept intact and in order") {
    std::vector<Vec2> pts;
    for (int i = 0; i < 400; ++i) {
        double a = kTwoPi * double(i) / 400.0;
        pts.push_back({std::cos(a), std::sin(a)});
    }
    std::vector<Vec2> hull = hull_layer(pts);
    REQUIRE(hull.size() == 400);
    // CCW order: every cross product positive
    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        const Vec2& c = hull[(i + 2) % hull.size()];
        CHECK((b - a).cross(c - b) > 0.0);
    }
}

TEST_CASE("hull is idempotent") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 200; ++i)
        pts.push_back({unit(rng), unit(rng)});
    std::vector<Vec2> h1 = hull_layer(pts);
    std::vector<Vec2> h2 = hull_layer(h1);
    REQUIRE(h1.size() == h2.size());
}

TEST_CASE("collinear points are a degenerate layer") {
    std::vector<Vec2> pts = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK_THROWS_AS(hull_layer(pts), SlicerError);
}

TEST_CASE("square resampled at N=400 has 1 mm spacing") {
    // perimeter 400 mm -> d = L/N = 1 mm
    std::vector<Vec2> square = {{50, -50}, {50, 50}, {-50, 50}, {-50, -50}};
    ContourLayer layer = resample_contour(square, 0.0, 400);
    CHECK(layer.perimeter == doctest::Approx(400.0));
    REQUIRE(layer.samples.size() == 400);
    for (size_t i = 0; i + 1 < layer.samples.size(); ++i) {
        Vec2 a = layer.world_xy(i);
        Vec2 b = layer.world_xy(i + 1);
        CHECK((b - a).norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("circle resampled keeps radius and uniform angular step") {
    std::vector<Vec2> poly;
    for (int i = 0; i < 1024; ++i) {
        double a = kTwoPi * double(i) / 1024.0;
        poly.push_back({30.0 * std::cos(a), 30.0 * std::sin(a)});
    }
    ContourLayer layer = resample_contour(poly, 0.0, 400);
    // samples sit on the chords of the source polygon: radius within one sagitta
    double sagitta = 30.0 * (1.0 - std::cos(kPi / 1024.0));
    for (const PolarSample& s : layer.samples) {
        CHECK(s.r <= 30.0 + 1e-12);
        CHECK(s.r >= 30.0 - sagitta - 1e-12);
    }
    CHECK(std::abs(layer.samples.front().theta) < 1e-9);
}

namespace {

// Independent arc-length accumulation oracle: the arc position of a boundary
// point, found by walking the polygon from a fixed start vertex.
double arc_position(const std::vector<Vec2>& poly, const Vec2& p) {
    double walked = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % poly.size()];
        Vec2 ab = b - a;
        double len = ab.norm();
        double t = ab.dot(p - a) / (len * len);
        if (t >= -1e-12 && t <= 1.0 + 1e-12) {
            Vec2 foot = a + ab * std::clamp(t, 0.0, 1.0);
            if ((foot - p).norm() < 1e-9)
                return walked + std::clamp(t, 0.0, 1.0) * len;
        }
        walked += len;
    }
    return -1.0;  // not on the boundary
}

}  // namespace

TEST_CASE("arbitrary convex polygon resamples to equal arc-length gaps") {
    std::vector<Vec2> poly = {{4, 0}, {3, 3}, {0, 4}, {-2, 2}, {-3, -1}, {0, -3}, {3, -2}};
    size_t n = 173;
    ContourLayer layer = resample_contour(poly, 0.0, n);
    double perimeter = layer.perimeter;
    double step = perimeter / double(n);

    std::vector<double> arcs;
    for (size_t i = 0; i < n; ++i) {
        double pos = arc_position(poly, layer.world_xy(i));
        REQUIRE(pos >= 0.0);
        arcs.push_back(pos);
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        double gap = arcs[i + 1] - arcs[i];
        if (gap < 0.0)
            gap += perimeter;  // wrap past the wal start vertex
        CHECK(gap == doctest::Approx(step).epsilon(1e-9));
    }
}

TEST_CASE("resampled chord perimeter is within 0.1% of the hull perimeter at N=400") {
    // the artifact's contour shapes: square, octagon and circle sections,
    // with the corner grid aligned as the generator emits them
    std::vector<std::vector<Vec2>> shapes;
    shapes.push_back({{26.5, -26.5}, {26.5, 26.5}, {-26.5, 26.5}, {-26.5, -26.5}});
    shapes.push_back(frustum_octagon(HelicalFrustum{30.0, 22.0, kPi / 4.0, 8, 40.0}, 0.0));
    std::vector<Vec2> circle;
    for (int i = 0; i < 1024; ++i) {
        double a = kTwoPi * double(i) / 1024.0;
        circle.push_back({30.0 * std::cos(a), 30.0 * std::sin(a)});
    }
    shapes.push_back(circle);
    for (const auto& poly : shapes) {
        ContourLayer layer = resample_contour(poly, 0.0, 400);
        double chord_sum = 0.0;
        for (size_t i = 0; i < 400; ++i)
            chord_sum += (layer.world_xy((i + 1) % 400) - layer.world_xy(i)).norm();
        CHECK(std::abs(chord_sum - layer.perimeter) / layer.perimeter < 1e-3);
    }
    // a twisted section misaligns the corners from the sample grid; the
    // deficit is bounded by the per-corner chord cut, 8*(1-cos(22.5deg))*d
    ContourLayer twisted =
        resample_contour(frustum_octagon(HelicalFrustum{30.0, 22.0, kPi / 4.0, 8, 40.0}, 13.0), 13.0, 400);
    double chord_sum = 0.0;
    for (size_t i = 0; i < 400; ++i)
        chord_sum += (twisted.world_xy((i + 1) % 400) - twisted.world_xy(i)).norm();
    CHECK(std::abs(chord_sum - twisted.perimeter) / twisted.perimeter < 2e-3);
}

TEST_CASE("slicing a generated cylinder mesh reproduces the analytic contours") {
    TriangleMesh mesh = shape_to_mesh(Cylinder{60.0, 40.0}, 256, 1.0);
    LayeredContourCloud sliced = slice_to_contours(mesh, 1.0, 400);
    LayeredContourCloud analytic = gen_shape(Cylinder{60.0, 40.0}, 1.0, 400);
    REQUIRE(sliced.layers.size() == analytic.layers.size());
    double sagitta = 30.0 * (1.0 - std::cos(kPi / 256.0));
    for (size_t k = 0; k < sliced.layers.size(); ++k) {
        CHECK(sliced.layers[k].z == doctest::Approx(analytic.layers[k].z));
        for (const PolarSample& s : sliced.layers[k].samples) {
            CHECK(s.r <= 30.0 + 1e-9);
            CHECK(s.r >= 30.0 - sagitta - 1e-9);
        }
    }
}

TEST_CASE("layered cloud round trips through the point-cloud form") {
    LayeredContourCloud cloud = gen_shape(ConcaveCylinder{25.0, 40.0, 6.0}, 5.0, 64);
    PointCloud flat = cloud.to_point_cloud();
    LayeredContourCloud back = contours_from_point_cloud(flat);
    REQUIRE(back.layers.size() == cloud.layers.size());
    for (size_t k = 0; k < cloud.layers.size(); ++k) {
        CHECK(back.layers[k].z == doctest::Approx(cloud.layers[k].z));
        CHECK(back.layers[k].center.y == doctest::Approx(cloud.layers[k].center.y).epsilon(1e-6));
        for (size_t i = 0; i < 64; ++i) {
            Vec2 a = cloud.layers[k].world_xy(i);
            Vec2 b = back.layers[k].world_xy(i);
            CHECK((a - b).norm() < 1e-9);
        }
    }
}
