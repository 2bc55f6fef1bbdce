#include "kneadforge/ideal_pcl.hpp"

#include <cmath>
#include <stdexcept>

namespace kneadforge {

void EndEffectorSpec::validate() const {
    if (!(diameter > 0.0))
        throw std::invalid_argument("effector: diameter must be positive");
    if (footprint_points < 4)
        throw std::invalid_argument("effector: need at least 4 footprint points");
    if (min_ring_points < 3)
        throw std::invalid_argument("effector: need at least 3 points per ring");
}

namespace {

int ring_count(const EndEffectorSpec& spec) {
    return int(std::sqrt(double(spec.footprint_points)));
}

int ring_points(const EndEffectorSpec& spec, double ring_radius) {
    double disc_radius = spec.diameter / 2.0;
    double spacing = disc_radius / std::sqrt(double(spec.footprint_points));
    return std::max(spec.min_ring_points, int(kTwoPi * ring_radius / spacing));
}

}  // namespace

size_t disc_footprint_count(const EndEffectorSpec& spec) {
    spec.validate();
    size_t count = 1;  // center point
    int rings = ring_count(spec);
    for (int k = 1; k <= rings; ++k) {
        double r_k = spec.diameter * double(k) / (2.0 * double(rings));
        count += size_t(ring_points(spec, r_k));
    }
    return count;
}

PointCloud disc_footprint(const Vec3& center, const Vec3& axis_dir, const EndEffectorSpec& spec) {
    spec.validate();
    Vec3 n = axis_dir.normalized();
    const Vec3 u{0.0, 0.0, 1.0};
    Vec3 nu = n.cross(u);
    double nu_norm = nu.norm();
    if (nu_norm < 1e-12)
        throw std::invalid_argument("disc_footprint: normal parallel to the vertical axis");
    Vec3 v = nu * (1.0 / nu_norm);

    PointCloud cloud;
    cloud.points.reserve(disc_footprint_count(spec));
    cloud.points.push_back(center);
    int rings = ring_count(spec);
    for (int k = 1; k <= rings; ++k) {
        double r_k = spec.diameter * double(k) / (2.0 * double(rings));
        int m = ring_points(spec, r_k);
        for (int j = 0; j < m; ++j) {
            double theta = kTwoPi * double(j) / double(m);
            cloud.points.push_back(center + u * (r_k * std::cos(theta)) + v * (r_k * std::sin(theta)));
        }
    }
    return cloud;
}

PointCloud ideal_cloud(const KneadingProgram& program, const EndEffectorSpec& spec) {
    spec.validate();
    PointCloud out;
    auto stamp = [&](double radius, double theta, double h) {
        if (!(radius > 1e-9))
            throw std::invalid_argument("ideal_cloud: command contact at the axis");
        Vec3 contact{radius * std::cos(theta), radius * std::sin(theta), h};
        Vec3 toward_axis{-std::cos(theta), -std::sin(theta), 0.0};
        PointCloud disc = disc_footprint(contact, toward_axis, spec);
        for (const Vec3& p : disc.points)
            if (p.z <= contact.z + 1e-12)
                out.points.push_back(p);
    };
    for (const KneadCommand& cmd : program.commands) {
        stamp(cmd.target_radius, cmd.theta_left, cmd.layer_height);
        stamp(cmd.right_target_radius(), cmd.theta_right, cmd.layer_height);
    }
    return out;
}

}  // namespace kneadforge
