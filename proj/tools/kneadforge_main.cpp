#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kneadforge/pipeline.hpp"
#include "kneadforge/report.hpp"

namespace fs = std::filesystem;
using namespace kneadforge;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    os << text;
}

fs::path default_out_dir() {
    const char* env = std::getenv("KNEADFORGE_OUT");
    return env && *env ? fs::path(env) : fs::path("out");
}

struct CommonShapeArgs {
    std::string geometry = "B";
    std::string shape_file;
    std::string stl_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--geometry", geometry, "built-in geometry A..E")->check(CLI::IsMember({"A", "B", "C", "D", "E"}));
        cmd->add_option("--shape-file", shape_file, "shape spec JSON file");
        cmd->add_option("--stl", stl_file, "input STL mesh");
    }

    void apply(PipelineOptions& opt) const {
        opt.geometry = geometry[0];
        if (!shape_file.empty())
            opt.custom_shape = shape_from_json(read_text(shape_file));
        if (!stl_file.empty())
            opt.stl_path = fs::path(stl_file);
    }
};

LayeredContourCloud load_contours(const fs::path& path) {
    return contours_from_point_cloud(read_cloud(path, CloudFormat::Csv));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kneadforge: geometry to kneading programs, simulated forming and registration metrics"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    unsigned long long seed = 0;
    app.add_option("--seed", seed, "reserved; no stage currently samples randomly");

    std::string out_dir = default_out_dir().string();
    app.add_option("--out", out_dir, "output directory (env KNEADFORGE_OUT)");

    // gen-shape ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-shape", "sample a parametric shape into a layered contour cloud");
    CommonShapeArgs gen_shape_args;
    gen_shape_args.attach(gen);
    double gen_step = 1.0;
    size_t gen_points = 400;
    std::string gen_out = "target.csv";
    std::string gen_stl_out;
    gen->add_option("--step", gen_step, "layer step in mm");
    gen->add_option("--points", gen_points, "points per layer");
    gen->add_option("--cloud-out", gen_out, "output cloud CSV");
    gen->add_option("--stl-out", gen_stl_out, "also emit the shape as binary STL");

    // slice ----------------------------------------------------------------
    auto* slice = app.add_subcommand("slice", "slice an STL mesh into layered contours");
    std::string slice_in;
    double slice_step = 0.1;
    size_t slice_points = 400;
    std::string slice_out = "sliced.csv";
    slice->add_option("--stl", slice_in, "input STL")->required();
    slice->add_option("--step", slice_step, "layer step in mm");
    slice->add_option("--points", slice_points, "points per layer");
    slice->add_option("--cloud-out", slice_out, "output cloud CSV");

    // classify ---------------------------------------------------------------
    auto* cls = app.add_subcommand("classify", "label a layered cloud enveloping / non-enveloping");
    std::string cls_cloud;
    std::string cls_report = "classification.json";
    cls->add_option("--cloud", cls_cloud, "layered cloud CSV")->required();
    cls->add_option("--report", cls_report, "report JSON path");

    // plan -------------------------------------------------------------------
    auto* plan = app.add_subcommand("plan", "generate a kneading program for a target cloud");
    std::string plan_cloud;
    std::string plan_strategy = "envelope";
    double plan_billet_r = 40.0;
    std::string plan_out = "program.json";
    PlannerConfig plan_cfg;
    plan->add_option("--cloud", plan_cloud, "target cloud CSV")->required();
    plan->add_option("--strategy", plan_strategy, "envelope | gradient")
        ->check(CLI::IsMember({"envelope", "gradient"}));
    plan->add_option("--billet-radius", plan_billet_r, "billet max radius in mm");
    plan->add_option("--finger-width", plan_cfg.finger_width, "opposed finger span W");
    plan->add_option("--mold-scale", plan_cfg.mold_scale, "roughing hold-back m");
    plan->add_option("--center-offset", plan_cfg.center_offset, "billet center offset s");
    plan->add_option("--effector", plan_cfg.effector_diameter, "effector diameter d_m");
    plan->add_option("--program-out", plan_out, "program JSON path");

    // ideal-pcl ----------------------------------------------------------------
    auto* ideal = app.add_subcommand("ideal-pcl", "stamp the ideal machining cloud from a program");
    std::string ideal_program;
    std::string ideal_out = "ideal.csv";
    bool ideal_all_cycles = false;
    EndEffectorSpec ideal_spec;
    ideal->add_option("--program", ideal_program, "program JSON")->required();
    ideal->add_option("--cloud-out", ideal_out, "output cloud CSV");
    ideal->add_flag("--all-cycles", ideal_all_cycles, "stamp every cycle, not only the forming pass");
    ideal->add_option("--footprint-points", ideal_spec.footprint_points, "nominal footprint budget");
    ideal->add_option("--min-ring-points", ideal_spec.min_ring_points, "minimum points per ring");

    // simulate -----------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "apply a program to a billet blank");
    std::string sim_program;
    std::string sim_billet = "{\"type\":\"cylinder\",\"diameter\":80,\"height\":40}";
    std::string sim_out = "formed.csv";
    std::string sim_series;
    double sim_eps = 0.3;
    size_t sim_angles = 400;
    double sim_dz = 0.5;
    sim->add_option("--program", sim_program, "program JSON")->required();
    sim->add_option("--billet", sim_billet, "billet spec JSON (inline or @file)");
    sim->add_option("--cloud-out", sim_out, "formed cloud CSV");
    sim->add_option("--area-series", sim_series, "per-cycle lateral area CSV");
    sim->add_option("--rebound", sim_eps, "elastic rebound in mm");
    sim->add_option("--angles", sim_angles, "billet grid angular samples");
    sim->add_option("--dz", sim_dz, "billet grid layer height");

    // register -----------------------------------------------------------------
    auto* reg = app.add_subcommand("register", "sweep ICP thresholds between two clouds");
    std::string reg_source, reg_target;
    std::string reg_curve = "curve.csv";
    double reg_start = 0.1, reg_stop = 20.0, reg_step = 0.1;
    std::string reg_compensated;
    reg->add_option("--source", reg_source, "source cloud CSV")->required();
    reg->add_option("--target", reg_target, "target cloud CSV")->required();
    reg->add_option("--curve-out", reg_curve, "threshold,fitness,rmse CSV");
    reg->add_option("--start", reg_start, "grid start");
    reg->add_option("--stop", reg_stop, "grid stop");
    reg->add_option("--step", reg_step, "grid step");
    reg->add_option("--compensated-out", reg_compensated, "write the compensated source cloud");

    // metrics -------------------------------------------------------------------
    auto* met = app.add_subcommand("metrics", "surface area and utilization metrics for a cloud");
    std::string met_cloud;
    double met_mass_in = 0.0, met_mass_out = 0.0;
    std::string met_report = "metrics.json";
    met->add_option("--cloud", met_cloud, "layered cloud CSV")->required();
    met->add_option("--mass-in", met_mass_in, "blank mass in grams");
    met->add_option("--mass-out", met_mass_out, "formed mass in grams");
    met->add_option("--report", met_report, "metrics JSON path");

    // pipeline ---------------------------------------------------------------
    auto* pipe = app.add_subcommand("pipeline", "run the full workflow for one geometry");
    CommonShapeArgs pipe_shape;
    pipe_shape.attach(pipe);
    std::string pipe_strategy = "auto";
    double pipe_eps = 0.3;
    pipe->add_option("--strategy", pipe_strategy, "auto | envelope | gradient")
        ->check(CLI::IsMember({"auto", "envelope", "gradient"}));
    pipe->add_option("--rebound", pipe_eps, "simulated elastic rebound in mm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << std::endl;
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }

    try {
        fs::path out(out_dir);

        if (gen->parsed()) {
            PipelineOptions opt;
            gen_shape_args.apply(opt);
            opt.points_per_layer = gen_points;
            LayeredContourCloud cloud = build_target(opt, gen_step);
            write_cloud(cloud.to_point_cloud(), out / gen_out, CloudFormat::Csv);
            if (!gen_stl_out.empty()) {
                ShapeSpec shape = opt.custom_shape ? *opt.custom_shape : geometry_preset(opt.geometry).shape;
                write_stl_binary(shape_to_mesh(shape), out / gen_stl_out);
            }
            std::cout << "layers=" << cloud.layers.size() << " points=" << cloud.to_point_cloud().size() << '\n';
        } else if (slice->parsed()) {
            TriangleMesh mesh = read_stl(slice_in);
            LayeredContourCloud cloud = slice_to_contours(mesh, slice_step, slice_points);
            write_cloud(cloud.to_point_cloud(), out / slice_out, CloudFormat::Csv);
            std::cout << "layers=" << cloud.layers.size() << '\n';
        } else if (cls->parsed()) {
            ClassificationReport report = classify(signature(load_contours(cls_cloud)));
            write_text(out / cls_report, report.to_json());
            std::cout << report.label_string() << '\n';
        } else if (plan->parsed()) {
            LayeredContourCloud target = load_contours(plan_cloud);
            plan_cfg.layer_step =
                (target.layers.back().z - target.layers.front().z) / double(target.layers.size() - 1);
            KneadingProgram prog =
                plan_program(target, plan_billet_r, plan_cfg, strategy_from_name(plan_strategy));
            write_text(out / plan_out, prog.to_json());
            std::cout << "cycles=" << prog.cycles.size() << " commands=" << prog.commands.size() << '\n';
        } else if (ideal->parsed()) {
            KneadingProgram prog = KneadingProgram::from_json(read_text(ideal_program));
            ideal_spec.diameter = prog.config.effector_diameter;
            PointCloud cloud = ideal_cloud(ideal_all_cycles ? prog : prog.finishing_only(), ideal_spec);
            write_cloud(cloud, out / ideal_out, CloudFormat::Csv);
            std::cout << "points=" << cloud.size() << '\n';
        } else if (sim->parsed()) {
            KneadingProgram prog = KneadingProgram::from_json(read_text(sim_program));
            std::string billet_json =
                sim_billet.size() > 1 && sim_billet[0] == '@' ? read_text(sim_billet.substr(1)) : sim_billet;
            ShapeSpec billet = shape_from_json(billet_json);
            BilletState state = init_billet(billet, sim_angles, sim_dz, sim_eps);
            std::vector<std::pair<int, double>> series;
            series.emplace_back(-1, ring_mesh_area(state.to_contours()));
            FormingResult res = run_program(state, prog, [&](size_t cycle, BilletState& s) {
                series.emplace_back(int(cycle), ring_mesh_area(s.to_contours()));
            });
            write_cloud(res.formed.to_point_cloud(), out / sim_out, CloudFormat::Csv);
            if (!sim_series.empty())
                write_text(out / sim_series, area_series_csv(series));
            std::cout << "volumeDrift=" << res.max_volume_drift << '\n';
        } else if (reg->parsed()) {
            PointCloud source = read_cloud(reg_source, CloudFormat::Csv);
            PointCloud target = read_cloud(reg_target, CloudFormat::Csv);
            RegistrationCurve curve = sweep(source, target, make_threshold_grid(reg_start, reg_stop, reg_step));
            write_text(out / reg_curve, curve.to_csv());
            if (curve.complete)
                std::cout << "threshold=" << curve.convergence_threshold << " rmse=" << curve.compensation_value
                          << '\n';
            else
                std::cout << "fitness 1.0 not reached within the grid\n";
            if (!reg_compensated.empty()) {
                PointCloud comp = compensate(source, curve.complete ? curve.compensation_value : 0.0);
                write_cloud(comp, out / reg_compensated, CloudFormat::Csv);
            }
        } else if (met->parsed()) {
            LayeredContourCloud cloud = load_contours(met_cloud);
            std::ostringstream js;
            js << "{\n  \"lateralArea\": " << format_double(ring_mesh_area(cloud))
               << ",\n  \"volume\": " << format_double(cloud_volume(cloud));
            if (met_mass_in > 0.0) {
                double ratio = utilization(met_mass_in, met_mass_out);
                js << ",\n  \"utilization\": " << format_double(ratio)
                   << ",\n  \"massLoss\": " << format_double(met_mass_in - met_mass_out) << ",\n  \"lossFlagged\": "
                   << ((met_mass_in - met_mass_out) > kMaxExpectedLossGrams ? "true" : "false");
            }
            js << "\n}\n";
            write_text(out / met_report, js.str());
            std::cout << "area=" << ring_mesh_area(cloud) << '\n';
        } else if (pipe->parsed()) {
            PipelineOptions opt;
            pipe_shape.apply(opt);
            opt.strategy = pipe_strategy;
            opt.rebound_eps = pipe_eps;
            opt.out_dir = out;
            PipelineResult result = run_pipeline(opt);
            write_pipeline_outputs(opt, result);
            std::cout << "strategy=" << strategy_name(result.strategy) << " label="
                      << result.classification.label_string() << " report=" << (out / "report.json").string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
