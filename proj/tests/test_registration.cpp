#include <doctest.h>

#include <cmath>
#include <random>

#include "kneadforge/registration.hpp"
#include "kneadforge/shapes.hpp"

using namespace kneadforge;

namespace {

PointCloud random_cloud(size_t n, uint64_t seed, double extent = 50.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-extent, extent);
    PointCloud cloud;
    for (size_t i = 0; i < n; ++i)
        cloud.points.push_back({coord(rng), coord(rng), coord(rng)});
    return cloud;
}

RigidTransform rotation_about(const Vec3& axis_raw, double angle, const Vec3& translation) {
    Vec3 axis = axis_raw.normalized();
    double c = std::cos(angle);
    double s = std::sin(angle);
    double x = axis.x, y = axis.y, z = axis.z;
    RigidTransform t;
    t.rotation = {c + x * x * (1 - c),     x * y * (1 - c) - z * s, x * z * (1 - c) + y * s,
                  y * x * (1 - c) + z * s, c + y * y * (1 - c),     y * z * (1 - c) - x * s,
                  z * x * (1 - c) - y * s, z * y * (1 - c) + x * s, c + z * z * (1 - c)};
    t.translation = translation;
    return t;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
    PointCloud out = cloud;
    for (Vec3& p : out.points)
        p = t.apply(p);
    return out;
}

double rotation_angle_between(const RigidTransform& a, const RigidTransform& b) {
    // angle of a * b^-1
    double trace = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            trace += a.rotation[3 * i + k] * b.rotation[3 * i + k];  // a * b^T diagonal sum
    double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace

TEST_CASE("icp on identical clouds is the identity with zero rmse") {
    PointCloud cloud = random_cloud(800, 5);
    RegistrationResult res = icp(cloud, cloud, 5.0);
    CHECK(res.fitness == doctest::Approx(1.0));
    CHECK(res.rmse == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.transform.rotation_determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rotation_angle_between(res.transform, RigidTransform{}) < 1e-9);
}

TEST_CASE("pure translation is recovered") {
    PointCloud source = random_cloud(600, 6);
    RigidTransform shift;
    shift.translation = {1.0, 0.0, 0.0};
    PointCloud target = apply_transform(source, shift);
    RegistrationResult res = icp(source, target, 5.0);
    CHECK(res.fitness == doctest::Approx(1.0));
    CHECK(res.rmse < 1e-6);
    CHECK(res.transform.translation.x == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(res.transform.translation.y) < 1e-6);
    CHECK(std::abs(res.transform.translation.z) < 1e-6);
}

TEST_CASE("random rigid motions are recovered to tight tolerances") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> angle(-0.6, 0.6);
    std::uniform_real_distribution<double> shift(-8.0, 8.0);
    int recovered = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        PointCloud source = random_cloud(500, 1000 + uint64_t(trial));
        RigidTransform truth = rotation_about({unit(rng), unit(rng), unit(rng)}, angle(rng),
                                              {shift(rng), shift(rng), shift(rng)});
        PointCloud target = apply_transform(source, truth);
        RegistrationResult res = icp(source, target, 60.0, 100, 1e-14);
        Vec3 dt = res.transform.translation - truth.translation;
        if (dt.norm() < 1e-5 && rotation_angle_between(res.transform, truth) < 1e-6)
            ++recovered;
    }
    CHECK(recovered == trials);
}

TEST_CASE("zero matches at a tiny threshold report fitness 0 with infinite rmse") {
    PointCloud source = random_cloud(100, 12);
    PointCloud target = source;
    for (Vec3& p : target.points)
        p.z += 500.0;  // far away
    RegistrationResult res = icp(source, target, 1e-6, 5, 1e-10, RigidTransform{});
    CHECK(res.fitness == doctest::Approx(0.0));
    CHECK(std::isinf(res.rmse));
}

TEST_CASE("degenerate clouds are rejected") {
    PointCloud line;
    for (int i = 0; i < 10; ++i)
        line.points.push_back({double(i), 2.0 * double(i), 0.0});
    PointCloud ok = random_cloud(10, 3);
    CHECK_THROWS_AS(icp(line, ok, 1.0), RegistrationError);
    CHECK_THROWS_AS(icp(ok, line, 1.0), RegistrationError);
}

TEST_CASE("kabsch never increases the rmse of a fixed correspondence set") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        PointCloud src = random_cloud(200, 400 + uint64_t(trial));
        // noisy correspondences of a transformed copy
        RigidTransform truth = rotation_about({unit(rng), unit(rng), unit(rng)}, 0.3 * unit(rng),
                                              {unit(rng), unit(rng), unit(rng)});
        std::vector<Vec3> dst;
        std::normal_distribution<double> noise(0.0, 0.2);
        for (const Vec3& p : src.points)
            dst.push_back(truth.apply(p) + Vec3{noise(rng), noise(rng), noise(rng)});

        auto rmse_of = [&](const RigidTransform& t) {
            double sq = 0.0;
            for (size_t i = 0; i < src.points.size(); ++i) {
                Vec3 d = t.apply(src.points[i]) - dst[i];
                sq += d.dot(d);
            }
            return std::sqrt(sq / double(src.points.size()));
        };
        double before = rmse_of(RigidTransform{});
        double after = rmse_of(kabsch(src.points, dst));
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("rigid-motion equivariance: icp(T*S, T*G) is the conjugated transform") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    PointCloud source = random_cloud(400, 21);
    RigidTransform inner = rotation_about({0.2, -0.5, 1.0}, 0.25, {3.0, -2.0, 1.0});
    PointCloud target = apply_transform(source, inner);
    for (int trial = 0; trial < 5; ++trial) {
        RigidTransform outer =
            rotation_about({unit(rng), unit(rng), unit(rng)}, 0.4 * unit(rng), {unit(rng) * 5, unit(rng) * 5, unit(rng) * 5});
        RegistrationResult res = icp(apply_transform(source, outer), apply_transform(target, outer), 80.0, 100, 1e-14);
        // expected: outer o inner o outer^-1; check by mapping sample points
        for (size_t i = 0; i < 10; ++i) {
            Vec3 p = source.points[i * 7];
            Vec3 expected = outer.apply(inner.apply(p));
            Vec3 got = res.transform.apply(outer.apply(p));
            CHECK((expected - got).norm() < 1e-5);
        }
    }
}

TEST_CASE("sweep on identical clouds is flat at fitness 1 with zero compensation") {
    PointCloud cloud = random_cloud(500, 42);
    RegistrationCurve curve = sweep(cloud, cloud, {0.1, 1.0, 10.0});
    REQUIRE(curve.samples.size() == 3);
    for (const auto& s : curve.samples)
        CHECK(s.fitness == doctest::Approx(1.0));
    CHECK(curve.complete);
    CHECK(curve.compensation_value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(curve.convergence_threshold == doctest::Approx(0.1));
}

TEST_CASE("radially inflated cylinder sweeps to a compensation near the inflation") {
    LayeredContourCloud base = gen_shape(Cylinder{60.0, 40.0}, 1.0, 200);
    PointCloud target = base.to_point_cloud();
    PointCloud inflated = target;
    for (Vec3& p : inflated.points) {
        double r = std::hypot(p.x, p.y);
        double s = (r + 1.0) / r;
        p.x *= s;
        p.y *= s;
    }
    RegistrationCurve curve = sweep(inflated, target, make_threshold_grid(0.1, 5.0, 0.1));
    REQUIRE(curve.complete);
    CHECK(curve.compensation_value == doctest::Approx(1.0).epsilon(0.1));

    // compensating by that value improves the convergence threshold
    PointCloud fixed = compensate(inflated, curve.compensation_value);
    RegistrationCurve better = sweep(fixed, target, make_threshold_grid(0.1, 5.0, 0.1));
    REQUIRE(better.complete);
    CHECK(better.convergence_threshold < curve.convergence_threshold);
    // and the residual compensation is smaller than the applied one
    CHECK(better.compensation_value < curve.compensation_value);
}

TEST_CASE("fitness is monotone along a warm-started sweep") {
    LayeredContourCloud base = gen_shape(ConcaveCylinder{25.0, 40.0, 6.0}, 2.0, 200);
    PointCloud target = base.to_point_cloud();
    PointCloud source = target;
    for (Vec3& p : source.points)
        p.z += 0.35;  // half a layer offset
    RegistrationCurve curve = sweep(source, target, make_threshold_grid(0.1, 4.0, 0.1));
    for (size_t i = 0; i + 1 < curve.samples.size(); ++i)
        CHECK(curve.samples[i].fitness <= curve.samples[i + 1].fitness + 1e-12);
}

TEST_CASE("compensate basics") {
    LayeredContourCloud base = gen_shape(Cylinder{62.0, 10.0}, 1.0, 100);
    PointCloud cloud = base.to_point_cloud();

    SUBCASE("zero value is the identity") {
        PointCloud out = compensate(cloud, 0.0);
        for (size_t i = 0; i < cloud.points.size(); ++i)
            CHECK((out.points[i] - cloud.points[i]).norm() == 0.0);
    }

    SUBCASE("r=31 shrinks to r=30 with z untouched") {
        PointCloud out = compensate(cloud, 1.0);
        REQUIRE(out.points.size() == cloud.points.size());
        REQUIRE(out.layer == cloud.layer);
        for (size_t i = 0; i < out.points.size(); ++i) {
            CHECK(std::hypot(out.points[i].x, out.points[i].y) == doctest::Approx(30.0).epsilon(1e-9));
            CHECK(out.points[i].z == cloud.points[i].z);
        }
    }

    SUBCASE("radius clamps at zero") {
        PointCloud out = compensate(cloud, 100.0);
        for (const Vec3& p : out.points)
            CHECK(std::hypot(p.x, p.y) < 1e-9);
    }
}

TEST_CASE("directed hausdorff and nearest distances") {
    PointCloud a;
    a.points = {{0, 0, 0}, {1, 0, 0}};
    PointCloud b;
    b.points = {{0, 0, 0}, {0, 0, 3}};
    std::vector<double> d = nearest_distances(a, b);
    CHECK(d[0] == doctest::Approx(0.0));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(directed_hausdorff(a, b) == doctest::Approx(1.0));
    CHECK(directed_hausdorff(b, a) == doctest::Approx(3.0));
}
