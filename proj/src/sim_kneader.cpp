#include "kneadforge/sim_kneader.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kneadforge {

namespace {
constexpr double kAreaFloor = 1e-9;  // below this a layer counts as empty
}

BilletState::BilletState(size_t angles, double dz, double rebound_eps)
    : angles_(angles), dz_(dz), rebound_eps_(rebound_eps), sin_step_(std::sin(kTwoPi / double(angles))) {
    if (angles < 8)
        throw std::invalid_argument("billet: need at least 8 angular samples");
    if (!(dz > 0.0))
        throw std::invalid_argument("billet: dz must be positive");
    if (rebound_eps < 0.0)
        throw std::invalid_argument("billet: rebound must be >= 0");
}

double BilletState::total_volume() const {
    double v = 0.0;
    for (double a : area_)
        v += a * dz_;
    return v;
}

double BilletState::max_radius() const {
    double r = 0.0;
    for (size_t k = 0; k < radii_.size(); ++k) {
        double s = std::sqrt(scale_[k]);
        for (double x : radii_[k])
            r = std::max(r, x * s);
    }
    return r;
}

const std::vector<double>& BilletState::layer_radii(size_t k) {
    materialize(k);
    return radii_[k];
}

void BilletState::materialize(size_t k) {
    if (scale_[k] != 1.0) {
        double s = std::sqrt(scale_[k]);
        for (double& r : radii_[k])
            r *= s;
        scale_[k] = 1.0;
    }
}

double BilletState::recompute_area(size_t k) const {
    const auto& r = radii_[k];
    double sum = 0.0;
    for (size_t i = 0; i < angles_; ++i)
        sum += r[i] * r[(i + 1) % angles_];
    return 0.5 * sin_step_ * sum * scale_[k];
}

void BilletState::clamp_window(size_t k, double theta, double target_radius, double face_half_width,
                               double& displaced) {
    materialize(k);
    auto& r = radii_[k];
    double perpendicular = std::max(target_radius + rebound_eps_, 0.0);

    // The finger face is flat: a cell at angular offset d from the contact is
    // touched only if its own tangential offset r*sin(d) lies within the face
    // half-width, and then clamps to the chord line, perpendicular/cos(d).
    double angle_step = kTwoPi / double(angles_);
    long center = std::llround(wrap_angle(theta) / angle_step);

    double before = area_[k];
    bool touched = false;
    auto visit = [&](long o) {
        size_t a = size_t(((center + o) % long(angles_) + long(angles_)) % long(angles_));
        double delta = double(o) * angle_step;
        if (r[a] > 1e-6 && r[a] * std::abs(std::sin(delta)) > face_half_width)
            return false;  // beyond the face edge
        double limit = perpendicular / std::cos(delta);
        if (r[a] > limit) {
            r[a] = limit;
            touched = true;
        }
        return true;
    };
    visit(0);
    const long cap = long(angles_) / 4;
    for (long o = 1; o <= cap && visit(o); ++o) {
    }
    for (long o = 1; o <= cap && visit(-o); ++o) {
    }
    if (!touched)
        return;
    double after = recompute_area(k);
    area_[k] = after;
    displaced += before - after;
}

void BilletState::redistribute_above(size_t band_top, double displaced) {
    if (displaced <= 0.0)
        return;
    std::vector<size_t> material;
    for (size_t k = band_top + 1; k < area_.size(); ++k)
        if (area_[k] > kAreaFloor)
            material.push_back(k);

    if (!material.empty()) {
        double share = displaced / double(material.size());
        for (size_t k : material) {
            double factor = (area_[k] + share) / area_[k];
            scale_[k] *= factor;
            area_[k] += share;
        }
        return;
    }

    // Nothing above: the material spills over the top. A partial top layer
    // fills up to the cross-section below it before new layers appear, so at
    // most one partial layer exists at a time.
    size_t top = area_.size();
    while (top > 0 && area_[top - 1] <= kAreaFloor)
        --top;
    if (top == 0)
        return;  // nothing left at all; cannot conserve an empty billet
    --top;

    auto grow = [&](size_t k, double add) {
        double factor = (area_[k] + add) / area_[k];
        scale_[k] *= factor;
        area_[k] += add;
    };

    while (displaced > 1e-12) {
        double reference = top > 0 && area_[top - 1] > kAreaFloor ? area_[top - 1] : area_[top];
        if (area_[top] < reference - 1e-9) {
            double add = std::min(displaced, reference - area_[top]);
            grow(top, add);
            displaced -= add;
            continue;
        }
        double take = std::min(displaced, area_[top]);
        if (top + 1 >= area_.size()) {
            area_.push_back(0.0);
            scale_.push_back(1.0);
            radii_.push_back(std::vector<double>(angles_, 0.0));
        }
        // new layers start circular; later squeezes shape them
        double radius = std::sqrt(2.0 * take / (double(angles_) * sin_step_));
        ++top;
        radii_[top].assign(angles_, radius);
        scale_[top] = 1.0;
        area_[top] = recompute_area(top);
        double residue = take - area_[top];
        if (std::abs(residue) > 0.0)
            grow(top, residue);  // float dust from the radius inversion
        displaced -= take;
    }
}

void BilletState::consolidate_top(double fraction) {
    // A sub-layer residue cannot stand as its own layer at the grid
    // resolution; relax it into the whole body as a uniform area share so no
    // single layer inflates visibly.
    size_t top = area_.size();
    while (top > 0 && area_[top - 1] <= kAreaFloor)
        --top;
    while (top >= 2 && area_[top - 1] < fraction * area_[top - 2]) {
        double moved = area_[top - 1];
        area_[top - 1] = 0.0;
        radii_[top - 1].assign(angles_, 0.0);
        scale_[top - 1] = 1.0;
        --top;
        double share = moved / double(top);
        for (size_t k = 0; k < top; ++k) {
            double factor = (area_[k] + share) / area_[k];
            scale_[k] *= factor;
            area_[k] += share;
        }
    }
}

void BilletState::apply_command(const KneadCommand& cmd, double band_half_height) {
    // Layers whose center falls inside the effector's vertical extent.
    long lo = (long)std::ceil((cmd.layer_height - band_half_height) / dz_ - 0.5 - 1e-9);
    long hi = (long)std::floor((cmd.layer_height + band_half_height) / dz_ - 0.5 + 1e-9);
    lo = std::max(lo, 0L);
    hi = std::min(hi, long(layer_count()) - 1);
    if (lo > hi)
        return;

    double displaced = 0.0;
    for (long k = lo; k <= hi; ++k) {
        if (area_[size_t(k)] <= kAreaFloor)
            continue;
        clamp_window(size_t(k), cmd.theta_left, cmd.target_radius, band_half_height, displaced);
        clamp_window(size_t(k), cmd.theta_right, cmd.right_target_radius(), band_half_height, displaced);
    }
    redistribute_above(size_t(hi), displaced);
}

LayeredContourCloud BilletState::to_contours() {
    LayeredContourCloud cloud;
    for (size_t k = 0; k < layer_count(); ++k) {
        if (area_[k] <= kAreaFloor)
            continue;
        materialize(k);
        ContourLayer layer;
        layer.z = layer_z(k);
        layer.center = {0.0, 0.0};
        layer.samples.reserve(angles_);
        std::vector<Vec2> pts;
        pts.reserve(angles_);
        for (size_t a = 0; a < angles_; ++a) {
            double theta = wrap_angle(kTwoPi * double(a) / double(angles_));
            layer.samples.push_back({radii_[k][a], theta});
            pts.push_back({radii_[k][a] * std::cos(theta), radii_[k][a] * std::sin(theta)});
        }
        layer.perimeter = polygon_perimeter(pts);
        cloud.layers.push_back(std::move(layer));
    }
    if (cloud.layers.empty())
        throw std::runtime_error("billet: no material layers to export");
    return cloud;
}

BilletState init_billet(const ShapeSpec& spec, size_t angles, double dz, double rebound_eps) {
    validate_shape(spec);
    double height = shape_height(spec);
    size_t layers = size_t(std::ceil(height / dz - 1e-9));
    BilletState state(angles, dz, rebound_eps);

    auto radius_at = [&](double theta) {
        if (const auto* cyl = std::get_if<Cylinder>(&spec))
            return cyl->diameter / 2.0;
        if (const auto* sq = std::get_if<SquarePrism>(&spec))
            return sq->side / 2.0 / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
        throw std::invalid_argument("billet: blank must be a cylinder or square prism");
    };

    state.radii_.assign(layers, std::vector<double>(angles, 0.0));
    state.scale_.assign(layers, 1.0);
    state.area_.assign(layers, 0.0);
    for (size_t k = 0; k < layers; ++k) {
        for (size_t a = 0; a < angles; ++a)
            state.radii_[k][a] = radius_at(kTwoPi * double(a) / double(angles));
        state.area_[k] = state.recompute_area(k);
    }
    // The grid quantizes the height upward; scale the top layer down so the
    // grid volume equals the analytic billet volume.
    double fraction = height / dz - double(layers - 1);
    if (layers > 0 && fraction < 1.0) {
        state.scale_[layers - 1] = fraction;
        state.area_[layers - 1] *= fraction;
    }
    return state;
}

double matched_billet_height(const ShapeSpec& billet_section, double target_volume) {
    double section_area = 0.0;
    if (const auto* cyl = std::get_if<Cylinder>(&billet_section))
        section_area = kPi * cyl->diameter * cyl->diameter / 4.0;
    else if (const auto* sq = std::get_if<SquarePrism>(&billet_section))
        section_area = sq->side * sq->side;
    else
        throw std::invalid_argument("billet: blank must be a cylinder or square prism");
    return target_volume / section_area;
}

FormingResult run_program(BilletState& state, const KneadingProgram& program,
                          const std::function<void(size_t cycle, BilletState&)>& on_cycle_end) {
    FormingResult result;
    result.initial_volume = state.total_volume();
    double band_half = program.config.effector_diameter / 2.0;

    double v_prev = result.initial_volume;
    int current_cycle = program.commands.empty() ? 0 : program.commands.front().cycle;
    for (size_t i = 0; i < program.commands.size(); ++i) {
        const KneadCommand& cmd = program.commands[i];
        if (cmd.cycle != current_cycle) {
            if (on_cycle_end)
                on_cycle_end(size_t(current_cycle), state);
            current_cycle = cmd.cycle;
        }
        state.apply_command(cmd, band_half);
        double v = state.total_volume();
        if (v_prev > 0.0)
            result.max_volume_drift = std::max(result.max_volume_drift, std::abs(v - v_prev) / v_prev);
        v_prev = v;
    }
    // Relax a residual partial top layer into the body before exporting.
    state.consolidate_top(0.9);
    if (!program.commands.empty() && on_cycle_end)
        on_cycle_end(size_t(current_cycle), state);

    result.final_volume = state.total_volume();
    result.formed = state.to_contours();
    return result;
}

}  // namespace kneadforge
