#include <doctest.h>

#include <random>

#include "kneadforge/shapes.hpp"

using namespace kneadforge;

namespace {

// Independent oracle: de Casteljau evaluation of a cubic Bezier. A clamped
// cubic B-spline with exactly 4 control points is Bezier-equivalent.
Vec2 de_casteljau(const std::vector<Vec2>& cp, double t) {
    std::vector<Vec2> pts = cp;
    for (size_t level = pts.size(); level > 1; --level)
        for (size_t i = 0; i + 1 < level; ++i)
            pts[i] = pts[i] * (1.0 - t) + pts[i + 1] * t;
    return pts[0];
}

}  // namespace

TEST_CASE("clamped cubic returns its endpoint control points") {
    std::vector<Vec2> cp = {{1, 0}, {2, 5}, {4, 5}, {5, 1}};
    BSplineCurve curve = make_clamped_bspline(cp);
    Vec2 p0 = eval_bspline(curve, 0.0);
    Vec2 p1 = eval_bspline(curve, 1.0);
    CHECK(p0.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p0.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p1.x == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(p1.y == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-span spline matches the de Casteljau oracle at 100 samples") {
    std::vector<Vec2> cp = {{0, 0}, {1, 3}, {3, 3}, {4, 0}};
    BSplineCurve curve = make_clamped_bspline(cp);
    for (int i = 0; i <= 100; ++i) {
        double t = double(i) / 100.0;
        Vec2 ours = eval_bspline(curve, t);
        Vec2 oracle = de_casteljau(cp, t);
        CHECK(ours.x == doctest::Approx(oracle.x).epsilon(1e-12));
        CHECK(ours.y == doctest::Approx(oracle.y).epsilon(1e-12));
    }
}

TEST_CASE("collinear control points on y = 2x stay on the line") {
    std::vector<Vec2> cp;
    for (int i = 0; i < 7; ++i)
        cp.push_back({double(i), 2.0 * double(i)});
    BSplineCurve curve = make_clamped_bspline(cp);
    for (int i = 0; i <= 100; ++i) {
        Vec2 p = eval_bspline(curve, double(i) / 100.0);
        CHECK(p.y == doctest::Approx(2.0 * p.x).epsilon(1e-10));
    }
}

TEST_CASE("basis functions form a partition of unity") {
    std::vector<Vec2> cp(9, Vec2{});
    for (size_t i = 0; i < cp.size(); ++i)
        cp[i] = {double(i), std::sin(double(i))};
    BSplineCurve curve = make_clamped_bspline(cp);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        double t = unit(rng);
        double lo = curve.knots[3];
        double hi = curve.knots[cp.size()];
        std::vector<double> basis = curve.basis(lo + t * (hi - lo));
        double sum = 0.0;
        for (double b : basis)
            sum += b;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("invalid knot vectors are rejected") {
    BSplineCurve curve;
    curve.degree = 3;
    curve.control_points = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    curve.knots = {0, 0, 0, 0, 1, 1, 1};  // one knot short
    CHECK_THROWS_AS(curve.validate(), std::invalid_argument);
    curve.knots = {0, 0, 0, 0.5, 0.2, 1, 1, 1};  // decreasing
    CHECK_THROWS_AS(curve.validate(), std::invalid_argument);
}

TEST_CASE("cylinder d=60 h=40 at 0.1 step gives 401 layers of radius 30") {
    LayeredContourCloud cloud = gen_shape(Cylinder{60.0, 40.0}, 0.1, 400);
    CHECK(cloud.layers.size() == 401);
    double worst = 0.0;
    for (const ContourLayer& layer : cloud.layers)
        for (const PolarSample& s : layer.samples)
            worst = std::max(worst, std::abs(s.r - 30.0));
    CHECK(worst < 1e-9);
}

TEST_CASE("concave cylinder center offset vanishes at both ends and peaks at mid height") {
    ConcaveCylinder shape{25.0, 40.0, 6.0};
    CHECK(concave_center_offset(shape, 0.0) == doctest::Approx(0.0));
    CHECK(concave_center_offset(shape, 40.0) == doctest::Approx(0.0));
    CHECK(concave_center_offset(shape, 20.0) == doctest::Approx(6.0));
    LayeredContourCloud cloud = gen_shape(shape, 1.0, 64);
    // every layer is an exact circle of the specified radius
    double worst = 0.0;
    for (const ContourLayer& layer : cloud.layers)
        for (const PolarSample& s : layer.samples)
            worst = std::max(worst, std::abs(s.r - 25.0));
    CHECK(worst < 1e-9);
    CHECK(cloud.layers.front().center.y == doctest::Approx(0.0));
    CHECK(cloud.layers[20].center.y == doctest::Approx(6.0));
}

TEST_CASE("degenerate frustum with equal radii and no twist is a straight prism") {
    HelicalFrustum shape{25.0, 25.0, 0.0, 8, 40.0};
    LayeredContourCloud cloud = gen_shape(shape, 2.0, 400);
    const ContourLayer& first = cloud.layers.front();
    for (const ContourLayer& layer : cloud.layers)
        for (size_t i = 0; i < layer.samples.size(); ++i) {
            CHECK(layer.samples[i].r == doctest::Approx(first.samples[i].r).epsilon(1e-9));
            CHECK(layer.samples[i].theta == doctest::Approx(first.samples[i].theta).epsilon(1e-9));
        }
}

TEST_CASE("frustum corner radii follow r(t) = r1 + (r2 - r1) t") {
    HelicalFrustum shape{30.0, 22.0, kPi / 4.0, 8, 40.0};
    for (double z : {0.0, 10.0, 25.0, 40.0}) {
        double expected = 30.0 + (22.0 - 30.0) * z / 40.0;
        for (const Vec2& corner : frustum_octagon(shape, z))
            CHECK(corner.norm() == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("slim waist surface is rotationally symmetric") {
    SlimWaist waist;
    waist.height = 40.0;
    waist.profile = make_clamped_bspline(
        {{28, 0}, {28, 5}, {26, 10}, {22, 15}, {20, 20}, {22, 25}, {26, 30}, {28, 35}, {28, 40}});
    LayeredContourCloud cloud = gen_shape(waist, 1.0, 256);
    for (const ContourLayer& layer : cloud.layers) {
        double r0 = layer.samples.front().r;
        for (const PolarSample& s : layer.samples)
            CHECK(std::abs(s.r - r0) < 1e-9);
        CHECK(r0 == doctest::Approx(slim_waist_radius(waist, layer.z)).epsilon(1e-12));
    }
    // endpoints clamp to the end control radii; the waist dips near z = h/2
    CHECK(slim_waist_radius(waist, 0.0) == doctest::Approx(28.0));
    CHECK(slim_waist_radius(waist, 40.0) == doctest::Approx(28.0));
    CHECK(slim_waist_radius(waist, 20.0) < 23.0);
}

TEST_CASE("shape JSON round trip") {
    ShapeSpec spec = HelicalFrustum{30.0, 22.0, kPi / 4.0, 8, 40.0};
    ShapeSpec back = shape_from_json(shape_to_json(spec));
    const auto& f = std::get<HelicalFrustum>(back);
    CHECK(f.r1 == 30.0);
    CHECK(f.r2 == 22.0);
    CHECK(f.layers == 8);
}

TEST_CASE("shape validation rejects nonpositive dimensions") {
    CHECK_THROWS_AS(validate_shape(Cylinder{-1.0, 40.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate_shape(SquarePrism{0.0, 40.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate_shape(HelicalFrustum{10, 10, 0, 1, 40}), std::invalid_argument);
}
