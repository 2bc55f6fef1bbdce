#include "kneadforge/pipeline.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "kneadforge/report.hpp"

namespace kneadforge {

using ordered_json = nlohmann::ordered_json;

GeometryPreset geometry_preset(char id) {
    switch (id) {
        case 'A':
            return {'A', SquarePrism{53.0, 40.0}, Cylinder{80.0, 40.0}};
        case 'B':
            return {'B', Cylinder{60.0, 40.0}, SquarePrism{60.0, 40.0}};
        case 'C': {
            SlimWaist waist;
            waist.height = 40.0;
            waist.profile = make_clamped_bspline({{28.0, 0.0},
                                                  {28.0, 5.0},
                                                  {26.0, 10.0},
                                                  {22.0, 15.0},
                                                  {20.0, 20.0},
                                                  {22.0, 25.0},
                                                  {26.0, 30.0},
                                                  {28.0, 35.0},
                                                  {28.0, 40.0}});
            return {'C', std::move(waist), Cylinder{80.0, 40.0}};
        }
        case 'D':
            return {'D', HelicalFrustum{30.0, 22.0, kPi / 4.0, 8, 40.0}, Cylinder{75.0, 40.0}};
        case 'E':
            return {'E', ConcaveCylinder{25.0, 40.0, 6.0}, Cylinder{80.0, 40.0}};
        default:
            throw std::invalid_argument(std::string("unknown geometry preset '") + id + "' (want A..E)");
    }
}

double cloud_volume(const LayeredContourCloud& cloud) {
    if (cloud.layers.size() < 2)
        throw std::invalid_argument("cloud_volume: need at least 2 layers");
    double dz = (cloud.layers.back().z - cloud.layers.front().z) / double(cloud.layers.size() - 1);
    double v = 0.0;
    for (const ContourLayer& layer : cloud.layers)
        v += layer_section_area(layer) * dz;
    return v;
}

LayeredContourCloud build_target(const PipelineOptions& options, double layer_step) {
    if (options.stl_path) {
        TriangleMesh mesh = read_stl(*options.stl_path);
        return slice_to_contours(mesh, layer_step, options.points_per_layer);
    }
    ShapeSpec shape = options.custom_shape ? *options.custom_shape : geometry_preset(options.geometry).shape;
    return gen_shape(shape, layer_step, options.points_per_layer);
}

namespace {

ShapeSpec billet_with_height(const ShapeSpec& section, double height) {
    ShapeSpec out = section;
    if (auto* cyl = std::get_if<Cylinder>(&out))
        cyl->height = height;
    else if (auto* sq = std::get_if<SquarePrism>(&out))
        sq->height = height;
    else
        throw std::invalid_argument("billet: blank must be a cylinder or square prism");
    return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
    PipelineResult result;
    result.target_plan = build_target(options, options.plan_layer_step);
    result.target_compare = build_target(options, options.compare_layer_step);

    result.classification = classify(signature(result.target_plan), options.classifier_tol);
    if (options.strategy == "auto")
        result.strategy =
            result.classification.label == ShapeClass::Enveloping ? Strategy::Envelope : Strategy::Gradient;
    else
        result.strategy = strategy_from_name(options.strategy);

    // Billet blank, height matched to the target volume.
    ShapeSpec billet_section =
        options.custom_billet ? *options.custom_billet : geometry_preset(options.geometry).billet_section;
    double target_volume = cloud_volume(result.target_plan);
    ShapeSpec billet = billet_with_height(billet_section, matched_billet_height(billet_section, target_volume));
    double billet_max_r = shape_max_radius(billet);

    result.program = plan_program(result.target_plan, billet_max_r, options.planner, result.strategy);

    // Ideal machining cloud from the forming pass.
    result.ideal = ideal_cloud(result.program.finishing_only(), options.effector);
    std::vector<double> grid = make_threshold_grid(options.sweep_grid.start, options.sweep_grid.stop,
                                                   options.sweep_grid.step);
    PointCloud target_points = result.target_compare.to_point_cloud();
    result.ideal_curve = sweep(result.ideal, target_points, grid);

    // Simulated forming.
    BilletState state = init_billet(billet, options.sim_angles, options.sim_dz, options.rebound_eps);
    result.target_area = ring_mesh_area(result.target_compare);
    result.area_series.emplace_back(-1, ring_mesh_area(state.to_contours()));
    FormingResult forming = run_program(state, result.program, [&](size_t cycle, BilletState& s) {
        result.area_series.emplace_back(int(cycle), ring_mesh_area(s.to_contours()));
    });
    result.formed = forming.formed;
    result.sim_volume_drift = forming.max_volume_drift;

    PointCloud formed_points = result.formed.to_point_cloud();
    result.formed_curve = sweep(formed_points, target_points, grid);
    double compensation = result.formed_curve.complete ? result.formed_curve.compensation_value : 0.0;
    result.compensated = compensate(formed_points, compensation);
    result.compensated_curve = sweep(result.compensated, target_points, grid);

    result.error_stats = error_distribution(formed_points, result.ideal, target_points);
    return result;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    os << text;
}

ordered_json curve_summary(const RegistrationCurve& curve) {
    ordered_json j;
    j["fitnessReached"] = curve.complete;
    j["convergenceThreshold"] = curve.complete ? curve.convergence_threshold : -1.0;
    j["rmseAtConvergence"] = curve.complete ? curve.compensation_value : -1.0;
    return j;
}

}  // namespace

std::string pipeline_report_json(const PipelineOptions& options, const PipelineResult& result) {
    ordered_json j;
    j["geometry"] = std::string(1, options.geometry);
    j["strategy"] = strategy_name(result.strategy);
    j["classification"] = ordered_json::parse(result.classification.to_json());
    j["planning"] = {{"cycles", result.program.cycles.size()},
                     {"commands", result.program.commands.size()},
                     {"compressedHeightCount", result.program.compressed_heights.size()}};
    j["registration"] = {{"ideal", curve_summary(result.ideal_curve)},
                         {"formed", curve_summary(result.formed_curve)},
                         {"compensated", curve_summary(result.compensated_curve)}};
    j["simulation"] = {{"maxVolumeDrift", result.sim_volume_drift},
                       {"reboundEps", options.rebound_eps}};
    ordered_json areas = ordered_json::array();
    for (const auto& [cycle, area] : result.area_series)
        areas.push_back({{"cycle", cycle}, {"area", area}});
    j["surface"] = {{"targetLateralArea", result.target_area}, {"series", areas}};
    j["errorStats"] = {{"meanNNFormed", result.error_stats.mean_nn_a},
                       {"meanNNIdeal", result.error_stats.mean_nn_b},
                       {"medianNNFormed", result.error_stats.median_nn_a},
                       {"medianNNIdeal", result.error_stats.median_nn_b},
                       {"U", result.error_stats.u_statistic},
                       {"pValue", result.error_stats.p_value},
                       {"stars", stars_label(result.error_stats.stars)}};
    return j.dump(2);
}

void write_pipeline_outputs(const PipelineOptions& options, const PipelineResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(options.out_dir);
    const fs::path& dir = options.out_dir;

    write_cloud(result.target_plan.to_point_cloud(), dir / "target_plan.csv", CloudFormat::Csv);
    write_cloud(result.target_compare.to_point_cloud(), dir / "target_compare.csv", CloudFormat::Csv);
    write_text(dir / "classification.json", result.classification.to_json());
    write_text(dir / "program.json", result.program.to_json());
    write_cloud(result.ideal, dir / "ideal.csv", CloudFormat::Csv);
    write_cloud(result.formed.to_point_cloud(), dir / "formed.csv", CloudFormat::Csv);
    write_cloud(result.compensated, dir / "compensated.csv", CloudFormat::Csv);
    write_text(dir / "curve_ideal.csv", result.ideal_curve.to_csv());
    write_text(dir / "curve_formed.csv", result.formed_curve.to_csv());
    write_text(dir / "curve_compensated.csv", result.compensated_curve.to_csv());
    write_text(dir / "area_series.csv", area_series_csv(result.area_series));
    write_text(dir / "report.json", pipeline_report_json(options, result));

    // RMSE-vs-threshold plot
    LinePlot rmse_plot;
    rmse_plot.title = std::string("Registration, geometry ") + options.geometry;
    rmse_plot.x_label = "threshold (mm)";
    rmse_plot.y_label = "RMSE (mm)";
    auto to_points = [](const RegistrationCurve& c) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : c.samples)
            if (std::isfinite(s.rmse))
                pts.emplace_back(s.threshold, s.rmse);
        return pts;
    };
    rmse_plot.series.push_back({"ideal", "", to_points(result.ideal_curve)});
    rmse_plot.series.push_back({"formed", "", to_points(result.formed_curve)});
    rmse_plot.series.push_back({"compensated", "", to_points(result.compensated_curve)});
    write_text(dir / "rmse_vs_threshold.svg", rmse_plot.to_svg());

    // Area evolution plot with the target area rule
    LinePlot area_plot;
    area_plot.title = std::string("Lateral area evolution, geometry ") + options.geometry;
    area_plot.x_label = "cycle";
    area_plot.y_label = "area (mm^2)";
    PlotSeries series;
    series.label = "simulated";
    for (const auto& [cycle, area] : result.area_series)
        series.points.emplace_back(double(cycle), area);
    area_plot.series.push_back(series);
    area_plot.horizontal_rule = result.target_area;
    area_plot.rule_label = "target";
    write_text(dir / "area_evolution.svg", area_plot.to_svg());
}

}  // namespace kneadforge
