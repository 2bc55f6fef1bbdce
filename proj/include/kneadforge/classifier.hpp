#pragma once

#include <string>
#include <vector>

#include "kneadforge/slicer.hpp"

namespace kneadforge {

// Per-layer descriptors the enveloping decision is made from.
struct ShapeSignature {
    std::vector<double> z;            // layer heights
    std::vector<double> mean_radius;  // mm
    std::vector<double> section_area; // mm^2, polar shoelace
    std::vector<double> torsion;      // rad/mm between this layer and the next (last repeats)
    std::vector<Vec2> center;         // layer centers in world XY
};

struct ClassifierTolerances {
    double grad_jump = 0.5;       // max step of dr/dz between layers, mm/mm
    int sign_flips = 0;           // allowed sign changes of dA/dz
    double area_noise = 1e-6;     // |dA/dz| below this counts as zero, mm^2/mm
    double torsion_jump = 0.05;   // max step of f(z) between layers, rad/mm
    double center_drift = 1.0;    // max distance of a layer center from the mean axis, mm
};

struct CriterionResult {
    std::string name;
    bool pass = false;
    double statistic = 0.0;
    double tolerance = 0.0;
};

enum class ShapeClass { Enveloping, NonEnveloping };

struct ClassificationReport {
    ShapeClass label = ShapeClass::NonEnveloping;
    std::vector<CriterionResult> criteria;

    std::string label_string() const { return label == ShapeClass::Enveloping ? "enveloping" : "non-enveloping"; }
    std::string to_json() const;
};

// Discrete per-layer signature: mean sampled radius, shoelace section area,
// twist rate from the circular cross-correlation peak of consecutive radius
// profiles (parabolic sub-sample refinement), and the layer centers.
ShapeSignature signature(const LayeredContourCloud& cloud);

// Enveloping iff the mean-radius gradient has no jumps, the section area is
// monotone, the twist rate has no jumps, and the centers stay on a common
// vertical axis.
ClassificationReport classify(const ShapeSignature& sig, const ClassifierTolerances& tol = {});

// Shoelace area of one polar contour about its layer center.
double layer_section_area(const ContourLayer& layer);

}  // namespace kneadforge
