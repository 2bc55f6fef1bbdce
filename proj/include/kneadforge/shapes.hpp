#pragma once

#include <string>
#include <variant>
#include <vector>

#include "kneadforge/mesh_io.hpp"
#include "kneadforge/slicer.hpp"

namespace kneadforge {

// Clamped cubic B-spline in the (r, z) plane; evaluated with the
// Cox-de Boor recursion.
struct BSplineCurve {
    std::vector<Vec2> control_points;  // (radius, height) pairs
    int degree = 3;
    std::vector<double> knots;  // size = control count + degree + 1

    void validate() const;
    // Basis functions N_{i,degree}(t) for all control points.
    std::vector<double> basis(double t) const;
};

// Clamped uniform knot vector (full end multiplicity), the common CAD default.
BSplineCurve make_clamped_bspline(std::vector<Vec2> control_points, int degree = 3);

Vec2 eval_bspline(const BSplineCurve& curve, double t);

struct SquarePrism {
    double side = 0.0;
    double height = 0.0;
};
struct Cylinder {
    double diameter = 0.0;
    double height = 0.0;
};
struct SlimWaist {
    BSplineCurve profile;  // radius as a function of normalized height
    double height = 0.0;
};
struct HelicalFrustum {
    double r1 = 0.0;          // vertex radius of the top octagon
    double r2 = 0.0;          // vertex radius of the bottom octagon
    double total_twist = 0.0; // radians, bottom relative to top
    int layers = 2;
    double height = 0.0;
};
struct ConcaveCylinder {
    double radius = 0.0;
    double height = 0.0;
    double max_offset = 0.0;  // peak lateral displacement of the layer center
};

using ShapeSpec = std::variant<SquarePrism, Cylinder, SlimWaist, HelicalFrustum, ConcaveCylinder>;

double shape_height(const ShapeSpec& spec);
// Largest distance from the machine axis to the shape surface; used for
// billet feasibility checks.
double shape_max_radius(const ShapeSpec& spec);
void validate_shape(const ShapeSpec& spec);

// Samples the shape into layered polar contours at z = 0, step, ... <= height.
// Polygonal sections (square, octagon) emit their corners and are densified
// with the slicer's arc-length resampler; circular sections are sampled
// directly at uniform angle.
LayeredContourCloud gen_shape(const ShapeSpec& spec, double layer_step, size_t points_per_layer = 400);

// The slim-waist radius profile r(z), Cox-de Boor over the radius coordinates
// with t = (z - z_min)/(z_max - z_min).
double slim_waist_radius(const SlimWaist& shape, double z);

// Center path of the concave cylinder: a parabola with apex max_offset at
// mid-height, zero at both ends.
double concave_center_offset(const ConcaveCylinder& shape, double z);

// The 8 twisted corner vertices of the frustum section at height z.
std::vector<Vec2> frustum_octagon(const HelicalFrustum& shape, double z);

// Closed triangle mesh (lateral surface plus end caps) for pipeline parity
// with STL input.
TriangleMesh shape_to_mesh(const ShapeSpec& spec, size_t angular_segments = 256, double z_step = 1.0);

// JSON spec document, keys mirroring the shape fields (mm / radians).
ShapeSpec shape_from_json(const std::string& json_text);
std::string shape_to_json(const ShapeSpec& spec);

}  // namespace kneadforge
