#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace kneadforge {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
    }
    Vec2 xy() const { return {x, y}; }
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi)
        a += kTwoPi;
    else if (a > kPi)
        a -= kTwoPi;
    return a;
}

// Rigid body motion p' = R*p + t with R stored row-major.
struct RigidTransform {
    std::array<double, 9> rotation = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 translation;

    Vec3 apply(const Vec3& p) const {
        const auto& r = rotation;
        return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
                r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
                r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
    }

    RigidTransform compose(const RigidTransform& inner) const {
        RigidTransform out;
        const auto& a = rotation;
        const auto& b = inner.rotation;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.rotation[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
        Vec3 rt = {a[0] * inner.translation.x + a[1] * inner.translation.y + a[2] * inner.translation.z,
                   a[3] * inner.translation.x + a[4] * inner.translation.y + a[5] * inner.translation.z,
                   a[6] * inner.translation.x + a[7] * inner.translation.y + a[8] * inner.translation.z};
        out.translation = rt + translation;
        return out;
    }

    double rotation_determinant() const {
        const auto& r = rotation;
        return r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
               r[2] * (r[3] * r[7] - r[4] * r[6]);
    }
};

}  // namespace kneadforge
