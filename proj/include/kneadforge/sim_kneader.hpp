#pragma once

#include <functional>

#include "kneadforge/planner.hpp"
#include "kneadforge/shapes.hpp"
#include "kneadforge/slicer.hpp"

namespace kneadforge {

// Simulated workpiece: a polar radius grid about the machine axis with one
// ring of samples per layer. Cross-section areas are tracked exactly (polar
// shoelace on the uniform angle grid) and every operation conserves the total
// volume by construction. Radial growth from displaced material is kept as a
// pending per-layer scale factor and materialized lazily.
class BilletState {
public:
    BilletState(size_t angles, double dz, double rebound_eps);

    size_t angle_count() const { return angles_; }
    size_t layer_count() const { return area_.size(); }
    double dz() const { return dz_; }
    double rebound_eps() const { return rebound_eps_; }
    double layer_z(size_t k) const { return (double(k) + 0.5) * dz_; }
    double layer_area(size_t k) const { return area_[k]; }
    double total_volume() const;
    double max_radius() const;

    // Radius samples of one layer with pending growth applied.
    const std::vector<double>& layer_radii(size_t k);

    // Squeeze one opposed finger pair: clamp the angular windows of every
    // layer in the band to max(target + rebound, 0) and push the displaced
    // area into the material above.
    void apply_command(const KneadCommand& cmd, double band_half_height);

    // Merge top layers smaller than the given fraction of the layer below
    // into that layer; volume is conserved.
    void consolidate_top(double fraction);

    LayeredContourCloud to_contours();

private:
    friend BilletState init_billet(const ShapeSpec& spec, size_t angles, double dz, double rebound_eps);

    void materialize(size_t k);
    double recompute_area(size_t k) const;
    void clamp_window(size_t k, double theta, double target_radius, double face_half_width, double& displaced);
    void redistribute_above(size_t band_top, double displaced);

    size_t angles_;
    double dz_;
    double rebound_eps_;
    double sin_step_;  // sin(2*pi/N), the shoelace weight of the uniform grid
    std::vector<std::vector<double>> radii_;
    std::vector<double> scale_;  // pending area growth factor per layer
    std::vector<double> area_;
};

// Analytic billet blanks: disks and square prisms.
BilletState init_billet(const ShapeSpec& spec, size_t angles, double dz, double rebound_eps);

// Billet height that matches the target volume, so displaced material fills
// the mold height instead of piling above it.
double matched_billet_height(const ShapeSpec& billet_section, double target_volume);

struct FormingResult {
    LayeredContourCloud formed;
    double initial_volume = 0.0;
    double final_volume = 0.0;
    double max_volume_drift = 0.0;  // max per-command relative drift
};

// Applies a program cycle by cycle; the optional callback observes the state
// between cycles (snapshots, area series).
FormingResult run_program(BilletState& state, const KneadingProgram& program,
                          const std::function<void(size_t cycle, BilletState&)>& on_cycle_end = {});

}  // namespace kneadforge
