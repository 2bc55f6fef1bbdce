#include "kneadforge/planner.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace kneadforge {

using ordered_json = nlohmann::ordered_json;

void PlannerConfig::validate() const {
    if (!(effector_diameter > 0.0))
        throw PlannerError("planner: effector diameter must be positive");
    if (!(finger_width > 0.0))
        throw PlannerError("planner: finger width must be positive");
    if (radial_compensation < 0.0)
        throw PlannerError("planner: radial compensation must be >= 0");
    if (mold_scale < 0.0)
        throw PlannerError("planner: mold scale must be >= 0");
    if (!(layer_step > 0.0))
        throw PlannerError("planner: layer step must be positive");
}

std::string strategy_name(Strategy s) {
    return s == Strategy::Envelope ? "envelope" : "gradient";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "envelope")
        return Strategy::Envelope;
    if (name == "gradient")
        return Strategy::Gradient;
    throw PlannerError("planner: unknown strategy '" + name + "'");
}

FingerPairing pair_fingers(size_t samples_per_layer) {
    if (samples_per_layer == 0 || samples_per_layer % 2 != 0)
        throw PlannerError("pair_fingers: sample count must be even");
    FingerPairing p;
    size_t half = samples_per_layer / 2;
    p.left.reserve(half);
    p.right.reserve(half);
    for (size_t i = 1; i <= half; ++i) {
        p.left.push_back(int(i));
        p.right.push_back(int(i + half));
    }
    return p;
}

double raw_depth(double radius, const PlannerConfig& cfg) {
    return cfg.finger_width / 2.0 - std::abs(radius - cfg.center_offset) - cfg.mold_scale;
}

namespace {

struct AxisLayer {
    double z = 0.0;
    std::vector<double> r;      // about the machine axis
    std::vector<double> theta;  // about the machine axis
    double max_r = 0.0;
};

std::vector<AxisLayer> to_axis_frame(const LayeredContourCloud& cloud) {
    std::vector<AxisLayer> out;
    out.reserve(cloud.layers.size());
    for (const ContourLayer& layer : cloud.layers) {
        AxisLayer al;
        al.z = layer.z;
        al.r.reserve(layer.samples.size());
        al.theta.reserve(layer.samples.size());
        for (size_t i = 0; i < layer.samples.size(); ++i) {
            Vec2 p = layer.world_xy(i);
            double r = p.norm();
            al.r.push_back(r);
            al.theta.push_back(std::atan2(p.y, p.x));
            al.max_r = std::max(al.max_r, r);
        }
        out.push_back(std::move(al));
    }
    return out;
}

double uniform_spacing(const std::vector<AxisLayer>& layers) {
    if (layers.size() < 2)
        throw PlannerError("planner: need at least 2 layers");
    return (layers.back().z - layers.front().z) / double(layers.size() - 1);
}

// Kneaded heights along the compressed span: band centers at half-step
// offsets, z_j = lo + (j + 1/2) * step, running through the rim so the
// effector bands tile the whole height bottom-up. Contour data comes from
// the nearest compressed layer; the command keeps the band-center height.
struct KneadHeight {
    size_t layer;
    double z;
};

std::vector<KneadHeight> select_knead_layers(const std::vector<double>& heights, double height_step) {
    double lo = heights.front();
    double hi = heights.back();
    double spacing = heights.size() > 1 ? (hi - lo) / double(heights.size() - 1) : 1.0;
    std::vector<KneadHeight> selected;
    for (double z = lo + height_step / 2.0; z <= hi + height_step / 2.0 + 1e-9; z += height_step) {
        size_t k = spacing > 0.0 ? size_t(std::clamp(std::llround((z - lo) / spacing), 0LL, (long long)(heights.size() - 1)))
                                 : 0;
        selected.push_back({k, z});
    }
    if (selected.empty())
        selected.push_back({heights.size() - 1, hi});
    return selected;
}

void emit_layer_commands(const AxisLayer& layer, double command_height, double delta_r, int cycle,
                         const PlannerConfig& pass_cfg, std::vector<KneadCommand>& out) {
    const size_t n = layer.r.size();
    const size_t half = n / 2;
    double d_compensated_max = layer.max_r + delta_r;
    double circumference = kTwoPi * d_compensated_max;
    double divisor = pass_cfg.mold_scale > 0.0 ? pass_cfg.effector_diameter : pass_cfg.effector_diameter / 2.0;
    double kneads = std::ceil(circumference / divisor);
    size_t stride = size_t(std::max(1.0, std::floor(double(n) / kneads)));

    for (size_t idx0 = 0; idx0 < n; idx0 += stride) {
        // Normalize the opposed pair so left always holds the low index; the
        // second half revolution revisits each pair with fingers swapped.
        size_t left0 = idx0 % half;
        size_t right0 = left0 + half;
        KneadCommand cmd;
        cmd.layer_height = command_height;
        cmd.cycle = cycle;
        cmd.left_index = int(left0 + 1);
        cmd.right_index = int(right0 + 1);
        cmd.target_radius = layer.r[left0] + delta_r;
        double right_target = layer.r[right0] + delta_r;
        cmd.left_depth = raw_depth(cmd.target_radius, pass_cfg);
        cmd.right_depth = raw_depth(right_target, pass_cfg);
        cmd.theta_left = layer.theta[left0];
        cmd.theta_right = layer.theta[right0];
        out.push_back(cmd);
    }
}

FeedCycle cycle_for(const PlannerConfig& cfg) {
    FeedCycle c;
    if (cfg.mold_scale > 0.0) {
        c.feed_depth = 1.0;
        c.height_step = cfg.effector_diameter - 1.0;
        c.radial_step = cfg.effector_diameter;
    } else {
        c.feed_depth = 0.0;
        c.height_step = cfg.effector_diameter / 2.0;
        c.radial_step = cfg.effector_diameter / 2.0;
    }
    return c;
}

void check_plannable(const LayeredContourCloud& target) {
    if (target.layers.empty())
        throw PlannerError("planner: empty target cloud");
    size_t n = target.samples_per_layer();
    if (n == 0 || n % 2 != 0)
        throw PlannerError("planner: per-layer sample count must be even");
    for (const ContourLayer& layer : target.layers)
        if (layer.samples.size() != n)
            throw PlannerError("planner: layers must share one sample count");
}

}  // namespace

KneadingProgram envelope_plan(const LayeredContourCloud& target, const PlannerConfig& cfg) {
    cfg.validate();
    check_plannable(target);
    std::vector<AxisLayer> layers = to_axis_frame(target);
    double dh = uniform_spacing(layers);
    double dr = cfg.radial_compensation;

    double v_orig = 0.0;
    double v_scaled = 0.0;
    for (const AxisLayer& l : layers) {
        v_orig += kPi * l.max_r * l.max_r * dh;
        double d2 = l.max_r + dr;
        v_scaled += kPi * d2 * d2 * dh;
    }
    double alpha = v_orig / v_scaled;

    KneadingProgram prog;
    prog.strategy = Strategy::Envelope;
    prog.config = cfg;
    prog.cycles = {cycle_for(cfg)};
    prog.compressed_heights.reserve(layers.size());
    double h1 = layers.front().z;
    for (const AxisLayer& l : layers)
        prog.compressed_heights.push_back(h1 + alpha * (l.z - h1));

    std::vector<KneadHeight> selected = select_knead_layers(prog.compressed_heights, prog.cycles[0].height_step);
    for (const KneadHeight& kh : selected)
        emit_layer_commands(layers[kh.layer], kh.z, dr, 0, cfg, prog.commands);
    return prog;
}

KneadingProgram gradient_plan(const LayeredContourCloud& target, const PlannerConfig& cfg) {
    cfg.validate();
    check_plannable(target);
    if (target.layers.size() < 2)
        throw PlannerError("gradient_plan: need at least 2 layers");
    std::vector<AxisLayer> layers = to_axis_frame(target);
    double dh = uniform_spacing(layers);
    double dr = cfg.radial_compensation;

    // Shoelace section areas in the machine's polar frame, original and
    // radially compensated.
    double v_orig = 0.0;
    double v_scaled = 0.0;
    for (const AxisLayer& l : layers) {
        double a = 0.0;
        double a_scaled = 0.0;
        size_t n = l.r.size();
        for (size_t i = 0; i < n; ++i) {
            size_t j = (i + 1) % n;
            double s = std::sin(l.theta[j] - l.theta[i]);
            a += l.r[i] * l.r[j] * s;
            a_scaled += (l.r[i] + dr) * (l.r[j] + dr) * s;
        }
        v_orig += 0.5 * a;
        v_scaled += 0.5 * a_scaled;
    }
    double alpha = v_orig / v_scaled;

    double h_min = layers.front().z;
    double h_max = layers.back().z;
    double h_max_compressed = h_min + (h_max - h_min) * alpha;

    size_t compressed_count = size_t(std::floor((h_max_compressed - h_min) / dh + 1e-9)) + 1;
    size_t n_layers = layers.size();

    KneadingProgram prog;
    prog.strategy = Strategy::Gradient;
    prog.config = cfg;
    prog.cycles = {cycle_for(cfg)};
    prog.compressed_heights.reserve(compressed_count);
    for (size_t k = 0; k < compressed_count; ++k)
        prog.compressed_heights.push_back(h_min + double(k) * dh);

    std::vector<KneadHeight> selected = select_knead_layers(prog.compressed_heights, prog.cycles[0].height_step);
    for (const KneadHeight& kh : selected) {
        size_t src = std::min(size_t(std::floor(double(kh.layer) / double(compressed_count) * double(n_layers))),
                              n_layers - 1);
        emit_layer_commands(layers[src], kh.z, dr, 0, cfg, prog.commands);
    }
    return prog;
}

std::vector<FeedCycle> plan_cycles(double billet_max_radius, double target_min_radius, const PlannerConfig& cfg) {
    cfg.validate();
    if (billet_max_radius < target_min_radius)
        throw PlannerError("plan_cycles: billet max radius below target minimum (infeasible billet)");
    double delta_r_max = billet_max_radius - target_min_radius;
    std::vector<FeedCycle> cycles;
    if (delta_r_max > 0.0) {
        size_t roughing = size_t(std::ceil(delta_r_max - 1e-12));
        PlannerConfig rough_cfg = cfg;
        if (rough_cfg.mold_scale <= 0.0)
            rough_cfg.mold_scale = 1.0;  // roughing always holds back
        for (size_t j = 0; j < roughing; ++j)
            cycles.push_back(cycle_for(rough_cfg));
    }
    PlannerConfig finish_cfg = cfg;
    finish_cfg.mold_scale = 0.0;
    cycles.push_back(cycle_for(finish_cfg));
    return cycles;
}

double cycle_radial_compensation(double delta_r_max, size_t cycle_index, size_t roughing_count) {
    if (cycle_index >= roughing_count)
        return 0.0;  // forming pass
    return std::max(delta_r_max - double(cycle_index + 1), 0.0);
}

KneadingProgram plan_program(const LayeredContourCloud& target, double billet_max_radius, const PlannerConfig& cfg,
                             Strategy strategy) {
    check_plannable(target);
    double t_min = target_min_radius(target);
    std::vector<FeedCycle> cycles = plan_cycles(billet_max_radius, t_min, cfg);
    size_t roughing = cycles.size() - 1;
    double delta_r_max = billet_max_radius - t_min;

    KneadingProgram prog;
    prog.strategy = strategy;
    prog.config = cfg;
    prog.cycles = cycles;
    for (size_t j = 0; j < cycles.size(); ++j) {
        PlannerConfig pass_cfg = cfg;
        pass_cfg.radial_compensation = cycle_radial_compensation(delta_r_max, j, roughing);
        pass_cfg.mold_scale = (j < roughing) ? (cfg.mold_scale > 0.0 ? cfg.mold_scale : 1.0) : 0.0;
        KneadingProgram pass =
            strategy == Strategy::Envelope ? envelope_plan(target, pass_cfg) : gradient_plan(target, pass_cfg);
        for (KneadCommand cmd : pass.commands) {
            cmd.cycle = int(j);
            prog.commands.push_back(cmd);
        }
        prog.compressed_heights = pass.compressed_heights;  // last pass wins (alpha = 1)
    }
    return prog;
}

double target_min_radius(const LayeredContourCloud& cloud) {
    double r_min = std::numeric_limits<double>::infinity();
    for (const ContourLayer& layer : cloud.layers)
        for (size_t i = 0; i < layer.samples.size(); ++i)
            r_min = std::min(r_min, layer.world_xy(i).norm());
    return r_min;
}

double target_max_radius(const LayeredContourCloud& cloud) {
    double r_max = 0.0;
    for (const ContourLayer& layer : cloud.layers)
        for (size_t i = 0; i < layer.samples.size(); ++i)
            r_max = std::max(r_max, layer.world_xy(i).norm());
    return r_max;
}

KneadingProgram KneadingProgram::finishing_only() const {
    KneadingProgram out;
    out.strategy = strategy;
    out.config = config;
    out.config.mold_scale = 0.0;
    out.config.radial_compensation = 0.0;
    if (!cycles.empty())
        out.cycles = {cycles.back()};
    int last = commands.empty() ? 0 : commands.back().cycle;
    for (const KneadCommand& cmd : commands)
        if (cmd.cycle == last) {
            KneadCommand c = cmd;
            c.cycle = 0;
            out.commands.push_back(c);
        }
    out.compressed_heights = compressed_heights;
    return out;
}

std::string KneadingProgram::to_json() const {
    ordered_json j;
    j["strategy"] = strategy_name(strategy);
    j["config"] = {{"fingerWidth", config.finger_width},
                   {"moldScale", config.mold_scale},
                   {"centerOffset", config.center_offset},
                   {"effectorDiameter", config.effector_diameter},
                   {"radialCompensation", config.radial_compensation},
                   {"layerStep", config.layer_step}};
    j["cycles"] = ordered_json::array();
    for (const FeedCycle& c : cycles)
        j["cycles"].push_back(
            {{"feedDepth", c.feed_depth}, {"heightStep", c.height_step}, {"radialStep", c.radial_step}});
    j["compressedHeights"] = compressed_heights;
    j["commands"] = ordered_json::array();
    for (const KneadCommand& c : commands)
        j["commands"].push_back({{"h", c.layer_height},
                                 {"i", c.left_index},
                                 {"dRawL", c.left_depth},
                                 {"j", c.right_index},
                                 {"dRawR", c.right_depth},
                                 {"targetR", c.target_radius},
                                 {"thL", c.theta_left},
                                 {"thR", c.theta_right},
                                 {"cycle", c.cycle}});
    return j.dump(2);
}

KneadingProgram KneadingProgram::from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    KneadingProgram prog;
    prog.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    const auto& cj = j.at("config");
    prog.config.finger_width = cj.at("fingerWidth").get<double>();
    prog.config.mold_scale = cj.at("moldScale").get<double>();
    prog.config.center_offset = cj.at("centerOffset").get<double>();
    prog.config.effector_diameter = cj.at("effectorDiameter").get<double>();
    prog.config.radial_compensation = cj.at("radialCompensation").get<double>();
    prog.config.layer_step = cj.at("layerStep").get<double>();
    for (const auto& c : j.at("cycles"))
        prog.cycles.push_back(
            {c.at("feedDepth").get<double>(), c.at("heightStep").get<double>(), c.at("radialStep").get<double>()});
    prog.compressed_heights = j.at("compressedHeights").get<std::vector<double>>();
    for (const auto& c : j.at("commands")) {
        KneadCommand cmd;
        cmd.layer_height = c.at("h").get<double>();
        cmd.left_index = c.at("i").get<int>();
        cmd.left_depth = c.at("dRawL").get<double>();
        cmd.right_index = c.at("j").get<int>();
        cmd.right_depth = c.at("dRawR").get<double>();
        cmd.target_radius = c.at("targetR").get<double>();
        cmd.theta_left = c.at("thL").get<double>();
        cmd.theta_right = c.at("thR").get<double>();
        cmd.cycle = c.value("cycle", 0);
        prog.commands.push_back(cmd);
    }
    return prog;
}

}  // namespace kneadforge
