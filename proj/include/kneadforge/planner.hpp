#pragma once

#include <string>
#include <vector>

#include "kneadforge/slicer.hpp"

namespace kneadforge {

struct PlannerConfig {
    double finger_width = 160.0;       // W, opposed-finger span in the home state
    double mold_scale = 1.0;           // m, hold-back during roughing; finishing runs at 0
    double center_offset = 0.0;        // s, billet center offset on the turntable
    double effector_diameter = 4.0;    // d_m
    double radial_compensation = 0.0;  // delta-r for the pass being planned
    double layer_step = 0.1;           // source layer spacing

    void validate() const;
};

// One squeeze: both fingers close on an opposed index pair of a layer
// contour. Contour indices are 1-based; right = left + N/2. Angles are about
// the machine axis so commands are self-contained for downstream consumers.
struct KneadCommand {
    double layer_height = 0.0;   // compressed height the squeeze runs at
    int left_index = 0;
    double left_depth = 0.0;     // finger displacement, W/2 - |D - s| - m
    int right_index = 0;
    double right_depth = 0.0;
    double target_radius = 0.0;  // compensated radius of the left contact, about the axis
    double theta_left = 0.0;
    double theta_right = 0.0;
    int cycle = 0;

    // Valid when contact radii exceed the center offset s (always true with
    // the default s = 0).
    double right_target_radius() const { return target_radius + left_depth - right_depth; }
};

struct FeedCycle {
    double feed_depth = 0.0;   // radial feed of this pass, mm (1 for roughing)
    double height_step = 0.0;  // vertical spacing between kneaded layers
    double radial_step = 0.0;  // effector-diameter divisor used for knead counts
};

enum class Strategy { Envelope, Gradient };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct KneadingProgram {
    Strategy strategy = Strategy::Envelope;
    PlannerConfig config;
    std::vector<FeedCycle> cycles;
    std::vector<KneadCommand> commands;
    std::vector<double> compressed_heights;

    std::string to_json() const;
    static KneadingProgram from_json(const std::string& text);

    // Commands belonging to the last cycle (the forming pass at m = 0); the
    // ideal machining cloud is built from these.
    KneadingProgram finishing_only() const;
};

class PlannerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Symmetric finger pairing over one half revolution: first half of the
// angularly ordered indices to the left finger, second half to the right.
struct FingerPairing {
    std::vector<int> left;   // 1-based
    std::vector<int> right;

    FingerPairing swapped() const { return {right, left}; }
};
FingerPairing pair_fingers(size_t samples_per_layer);

double raw_depth(double radius, const PlannerConfig& cfg);

// One envelope-shaping pass: per-layer max radii drive the volume ratio, the
// heights compress by alpha, and each selected layer gets ceil(N/s) strided
// squeezes at its compensated per-point radii.
KneadingProgram envelope_plan(const LayeredContourCloud& target, const PlannerConfig& cfg);

// One similar-gradient pass: shoelace section areas drive the volume ratio,
// the compressed layer grid maps back to source layers by index scaling.
KneadingProgram gradient_plan(const LayeredContourCloud& target, const PlannerConfig& cfg);

// Feed schedule from the minimum-radius principle: one 1 mm roughing pass per
// ceil(delta_r_max), then a fine forming pass.
std::vector<FeedCycle> plan_cycles(double billet_max_radius, double target_min_radius, const PlannerConfig& cfg);

// Radial compensation the j-th cycle (0-based) of the schedule plans at.
double cycle_radial_compensation(double delta_r_max, size_t cycle_index, size_t roughing_count);

// Full multi-cycle program: every roughing pass plus the forming pass, with
// commands tagged by cycle.
KneadingProgram plan_program(const LayeredContourCloud& target, double billet_max_radius, const PlannerConfig& cfg,
                             Strategy strategy);

// Smallest and largest sample radius about the machine axis.
double target_min_radius(const LayeredContourCloud& cloud);
double target_max_radius(const LayeredContourCloud& cloud);

}  // namespace kneadforge
