#pragma once

#include "kneadforge/mesh_io.hpp"
#include "kneadforge/planner.hpp"

namespace kneadforge {

struct EndEffectorSpec {
    double diameter = 4.0;      // d_m
    int footprint_points = 40;  // N_gp, nominal budget driving ring layout
    int min_ring_points = 8;    // K, floor per ring

    void validate() const;
};

// Sampled disc of the effector face: concentric rings around the center
// point, ring radii d_m*k / (2*floor(sqrt(N_gp))), point counts
// max(K, int(2*pi*r_k / (R/sqrt(N_gp)))) with R the disc radius.
// u is vertical (0,0,1); v completes the frame from the disc normal.
PointCloud disc_footprint(const Vec3& center, const Vec3& axis_dir, const EndEffectorSpec& spec);

// Point count disc_footprint will emit; closed-form companion used for
// validation and sizing.
size_t disc_footprint_count(const EndEffectorSpec& spec);

// Ideal machining cloud: every command is inverted to its two contact points
// (target radius at the contact angle, at the command height), a disc
// footprint is stamped perpendicular to XOY with the normal toward the Z
// axis, and only the lower half (z <= center) survives, since forming runs
// layer by layer bottom-up.
PointCloud ideal_cloud(const KneadingProgram& program, const EndEffectorSpec& spec);

}  // namespace kneadforge
