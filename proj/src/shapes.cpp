#include "kneadforge/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace kneadforge {

using nlohmann::json;

void BSplineCurve::validate() const {
    if (degree < 1)
        throw std::invalid_argument("bspline: degree must be >= 1");
    if (control_points.size() < size_t(degree) + 1)
        throw std::invalid_argument("bspline: need at least degree+1 control points");
    if (knots.size() != control_points.size() + size_t(degree) + 1)
        throw std::invalid_argument("bspline: knot count must equal control count + degree + 1");
    for (size_t i = 1; i < knots.size(); ++i)
        if (knots[i] < knots[i - 1])
            throw std::invalid_argument("bspline: knots must be non-decreasing");
}

std::vector<double> BSplineCurve::basis(double t) const {
    const size_t n = control_points.size();
    const size_t p = size_t(degree);
    // Evaluate on the half-open spans; the parameter-domain end maps into the
    // last non-empty span so clamped curves return the last control point.
    double t_lo = knots[p];
    double t_hi = knots[n];
    std::vector<double> N(knots.size() - 1, 0.0);
    if (t >= t_hi) {
        size_t span = n - 1;
        while (span > 0 && knots[span] == knots[span + 1])
            --span;
        N[span] = 1.0;
        t = t_hi;
    } else {
        for (size_t i = 0; i + 1 < knots.size(); ++i)
            if (knots[i] <= t && t < knots[i + 1]) {
                N[i] = 1.0;
                break;
            }
        if (t < t_lo)
            throw std::invalid_argument("bspline: parameter below domain");
    }
    for (size_t d = 1; d <= p; ++d) {
        // In-place ascending update: slot i is finished before slot i+1 is read.
        for (size_t i = 0; i + d + 1 < knots.size(); ++i) {
            double left = 0.0;
            double denom_l = knots[i + d] - knots[i];
            if (denom_l > 0.0)
                left = (t - knots[i]) / denom_l * N[i];
            double right = 0.0;
            double denom_r = knots[i + d + 1] - knots[i + 1];
            if (denom_r > 0.0)
                right = (knots[i + d + 1] - t) / denom_r * N[i + 1];
            N[i] = left + right;
        }
    }
    N.resize(n);
    return N;
}

BSplineCurve make_clamped_bspline(std::vector<Vec2> control_points, int degree) {
    BSplineCurve curve;
    curve.degree = degree;
    curve.control_points = std::move(control_points);
    size_t n = curve.control_points.size();
    size_t p = size_t(degree);
    if (n < p + 1)
        throw std::invalid_argument("bspline: need at least degree+1 control points");
    curve.knots.assign(n + p + 1, 0.0);
    size_t interior = n - p;  // number of spans
    for (size_t i = 0; i <= p; ++i) {
        curve.knots[i] = 0.0;
        curve.knots[n + i] = 1.0;
    }
    for (size_t i = 1; i < interior; ++i)
        curve.knots[p + i] = double(i) / double(interior);
    curve.validate();
    return curve;
}

Vec2 eval_bspline(const BSplineCurve& curve, double t) {
    curve.validate();
    if (t < 0.0 || t > 1.0)
        throw std::invalid_argument("bspline: t must lie in [0,1]");
    // Map [0,1] onto the valid parameter domain.
    double lo = curve.knots[size_t(curve.degree)];
    double hi = curve.knots[curve.control_points.size()];
    double u = lo + t * (hi - lo);
    std::vector<double> N = curve.basis(u);
    Vec2 out;
    for (size_t i = 0; i < curve.control_points.size(); ++i) {
        out.x += N[i] * curve.control_points[i].x;
        out.y += N[i] * curve.control_points[i].y;
    }
    return out;
}

namespace {

template <class... Ts>
struct Overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

void require_positive(double v, const char* name) {
    if (!(v > 0.0))
        throw std::invalid_argument(std::string("shape: ") + name + " must be positive");
}

std::vector<Vec2> square_corners(double side) {
    double h = side / 2.0;
    return {{h, -h}, {h, h}, {-h, h}, {-h, -h}};  // CCW
}

}  // namespace

void validate_shape(const ShapeSpec& spec) {
    std::visit(Overload{
                   [](const SquarePrism& s) {
                       require_positive(s.side, "side");
                       require_positive(s.height, "height");
                   },
                   [](const Cylinder& s) {
                       require_positive(s.diameter, "diameter");
                       require_positive(s.height, "height");
                   },
                   [](const SlimWaist& s) {
                       require_positive(s.height, "height");
                       s.profile.validate();
                       for (const Vec2& p : s.profile.control_points)
                           require_positive(p.x, "profile radius");
                   },
                   [](const HelicalFrustum& s) {
                       require_positive(s.r1, "r1");
                       require_positive(s.r2, "r2");
                       require_positive(s.height, "height");
                       if (s.layers < 2)
                           throw std::invalid_argument("shape: frustum needs at least 2 layers");
                   },
                   [](const ConcaveCylinder& s) {
                       require_positive(s.radius, "radius");
                       require_positive(s.height, "height");
                       if (s.max_offset < 0.0)
                           throw std::invalid_argument("shape: max_offset must be >= 0");
                   },
               },
               spec);
}

double shape_height(const ShapeSpec& spec) {
    return std::visit(Overload{
                          [](const SquarePrism& s) { return s.height; },
                          [](const Cylinder& s) { return s.height; },
                          [](const SlimWaist& s) { return s.height; },
                          [](const HelicalFrustum& s) { return s.height; },
                          [](const ConcaveCylinder& s) { return s.height; },
                      },
                      spec);
}

double shape_max_radius(const ShapeSpec& spec) {
    return std::visit(Overload{
                          [](const SquarePrism& s) { return s.side * std::sqrt(2.0) / 2.0; },
                          [](const Cylinder& s) { return s.diameter / 2.0; },
                          [](const SlimWaist& s) {
                              double r = 0.0;
                              for (int i = 0; i <= 400; ++i)
                                  r = std::max(r, slim_waist_radius(s, s.height * double(i) / 400.0));
                              return r;
                          },
                          [](const HelicalFrustum& s) { return std::max(s.r1, s.r2); },
                          [](const ConcaveCylinder& s) { return s.radius + s.max_offset; },
                      },
                      spec);
}

double slim_waist_radius(const SlimWaist& shape, double z) {
    double t = std::clamp(z / shape.height, 0.0, 1.0);
    return eval_bspline(shape.profile, t).x;
}

double concave_center_offset(const ConcaveCylinder& shape, double z) {
    double u = z / shape.height;
    return 4.0 * shape.max_offset * u * (1.0 - u);
}

std::vector<Vec2> frustum_octagon(const HelicalFrustum& shape, double z) {
    double t = z / shape.height;
    double r = shape.r1 + (shape.r2 - shape.r1) * t;
    double twist = shape.total_twist * t;
    std::vector<Vec2> corners;
    corners.reserve(8);
    for (int i = 0; i < 8; ++i) {
        double phi = kTwoPi * double(i) / 8.0 + twist;
        corners.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return corners;
}

namespace {

ContourLayer circle_layer(double z, Vec2 center, double radius, size_t n) {
    ContourLayer layer;
    layer.z = z;
    layer.center = center;
    layer.perimeter = 2.0 * double(n) * radius * std::sin(kPi / double(n));
    layer.samples.reserve(n);
    for (size_t i = 0; i < n; ++i)
        layer.samples.push_back({radius, wrap_angle(kTwoPi * double(i) / double(n))});
    return layer;
}

}  // namespace

LayeredContourCloud gen_shape(const ShapeSpec& spec, double layer_step, size_t points_per_layer) {
    validate_shape(spec);
    if (layer_step <= 0.0)
        throw std::invalid_argument("gen_shape: layer step must be positive");
    if (points_per_layer < 3)
        throw std::invalid_argument("gen_shape: need at least 3 points per layer");

    double height = shape_height(spec);
    size_t layer_count = size_t(std::floor(height / layer_step + 1e-9)) + 1;

    LayeredContourCloud cloud;
    cloud.layers.reserve(layer_count);
    for (size_t li = 0; li < layer_count; ++li) {
        double z = double(li) * layer_step;
        ContourLayer layer = std::visit(
            Overload{
                [&](const SquarePrism& s) { return resample_contour(square_corners(s.side), z, points_per_layer); },
                [&](const Cylinder& s) { return circle_layer(z, {0, 0}, s.diameter / 2.0, points_per_layer); },
                [&](const SlimWaist& s) {
                    return circle_layer(z, {0, 0}, slim_waist_radius(s, z), points_per_layer);
                },
                [&](const HelicalFrustum& s) {
                    return resample_contour(frustum_octagon(s, z), z, points_per_layer);
                },
                [&](const ConcaveCylinder& s) {
                    return circle_layer(z, {0.0, concave_center_offset(s, z)}, s.radius, points_per_layer);
                },
            },
            spec);
        cloud.layers.push_back(std::move(layer));
    }
    return cloud;
}

namespace {

// Ring-stacked closed mesh: cross-section polygons at successive heights,
// side quads split into triangles, triangle-fan caps.
TriangleMesh mesh_from_rings(const std::vector<std::vector<Vec3>>& rings) {
    TriangleMesh mesh;
    size_t m = rings.front().size();
    auto add_tri = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
        uint32_t base = uint32_t(mesh.vertices.size());
        mesh.vertices.push_back(a);
        mesh.vertices.push_back(b);
        mesh.vertices.push_back(c);
        mesh.triangles.push_back({base, base + 1, base + 2});
    };
    for (size_t k = 0; k + 1 < rings.size(); ++k) {
        for (size_t j = 0; j < m; ++j) {
            size_t jn = (j + 1) % m;
            add_tri(rings[k][j], rings[k + 1][j], rings[k + 1][jn]);
            add_tri(rings[k][j], rings[k + 1][jn], rings[k][jn]);
        }
    }
    // caps
    Vec3 c0{0, 0, rings.front().front().z};
    Vec3 c1{0, 0, rings.back().front().z};
    for (size_t j = 0; j < m; ++j) {
        size_t jn = (j + 1) % m;
        add_tri(c0, rings.front()[jn], rings.front()[j]);
        add_tri(c1, rings.back()[j], rings.back()[jn]);
    }
    return mesh;
}

}  // namespace

TriangleMesh shape_to_mesh(const ShapeSpec& spec, size_t angular_segments, double z_step) {
    validate_shape(spec);
    double height = shape_height(spec);
    size_t ring_count = size_t(std::ceil(height / z_step - 1e-9)) + 1;
    std::vector<std::vector<Vec3>> rings(ring_count);
    for (size_t k = 0; k < ring_count; ++k) {
        double z = (k + 1 == ring_count) ? height : double(k) * z_step;
        std::vector<Vec2> section = std::visit(
            Overload{
                [&](const SquarePrism& s) { return square_corners(s.side); },
                [&](const Cylinder& s) {
                    std::vector<Vec2> ring;
                    for (size_t j = 0; j < angular_segments; ++j) {
                        double a = kTwoPi * double(j) / double(angular_segments);
                        ring.push_back({s.diameter / 2.0 * std::cos(a), s.diameter / 2.0 * std::sin(a)});
                    }
                    return ring;
                },
                [&](const SlimWaist& s) {
                    double r = slim_waist_radius(s, z);
                    std::vector<Vec2> ring;
                    for (size_t j = 0; j < angular_segments; ++j) {
                        double a = kTwoPi * double(j) / double(angular_segments);
                        ring.push_back({r * std::cos(a), r * std::sin(a)});
                    }
                    return ring;
                },
                [&](const HelicalFrustum& s) { return frustum_octagon(s, z); },
                [&](const ConcaveCylinder& s) {
                    double d = concave_center_offset(s, z);
                    std::vector<Vec2> ring;
                    for (size_t j = 0; j < angular_segments; ++j) {
                        double a = kTwoPi * double(j) / double(angular_segments);
                        ring.push_back({s.radius * std::cos(a), d + s.radius * std::sin(a)});
                    }
                    return ring;
                },
            },
            spec);
        rings[k].reserve(section.size());
        for (const Vec2& p : section)
            rings[k].push_back({p.x, p.y, z});
    }
    return mesh_from_rings(rings);
}

ShapeSpec shape_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    std::string type = j.at("type").get<std::string>();
    ShapeSpec spec;
    if (type == "square_prism") {
        spec = SquarePrism{j.at("side").get<double>(), j.at("height").get<double>()};
    } else if (type == "cylinder") {
        spec = Cylinder{j.at("diameter").get<double>(), j.at("height").get<double>()};
    } else if (type == "slim_waist") {
        SlimWaist s;
        s.height = j.at("height").get<double>();
        std::vector<Vec2> pts;
        for (const auto& cp : j.at("control_points"))
            pts.push_back({cp.at(0).get<double>(), cp.at(1).get<double>()});
        s.profile = make_clamped_bspline(std::move(pts));
        spec = std::move(s);
    } else if (type == "helical_frustum") {
        spec = HelicalFrustum{j.at("r1").get<double>(), j.at("r2").get<double>(),
                              j.at("total_twist").get<double>(), j.at("layers").get<int>(),
                              j.at("height").get<double>()};
    } else if (type == "concave_cylinder") {
        spec = ConcaveCylinder{j.at("radius").get<double>(), j.at("height").get<double>(),
                               j.at("max_offset").get<double>()};
    } else {
        throw std::invalid_argument("shape: unknown type '" + type + "'");
    }
    validate_shape(spec);
    return spec;
}

std::string shape_to_json(const ShapeSpec& spec) {
    json j;
    std::visit(Overload{
                   [&](const SquarePrism& s) {
                       j = {{"type", "square_prism"}, {"side", s.side}, {"height", s.height}};
                   },
                   [&](const Cylinder& s) {
                       j = {{"type", "cylinder"}, {"diameter", s.diameter}, {"height", s.height}};
                   },
                   [&](const SlimWaist& s) {
                       json pts = json::array();
                       for (const Vec2& p : s.profile.control_points)
                           pts.push_back({p.x, p.y});
                       j = {{"type", "slim_waist"}, {"height", s.height}, {"control_points", pts}};
                   },
                   [&](const HelicalFrustum& s) {
                       j = {{"type", "helical_frustum"}, {"r1", s.r1},         {"r2", s.r2},
                            {"total_twist", s.total_twist}, {"layers", s.layers}, {"height", s.height}};
                   },
                   [&](const ConcaveCylinder& s) {
                       j = {{"type", "concave_cylinder"},
                            {"radius", s.radius},
                            {"height", s.height},
                            {"max_offset", s.max_offset}};
                   },
               },
               spec);
    return j.dump(2);
}

}  // namespace kneadforge
