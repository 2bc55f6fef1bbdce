#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "kneadforge/classifier.hpp"
#include "kneadforge/ideal_pcl.hpp"
#include "kneadforge/metrics.hpp"
#include "kneadforge/planner.hpp"
#include "kneadforge/registration.hpp"
#include "kneadforge/shapes.hpp"
#include "kneadforge/sim_kneader.hpp"

namespace kneadforge {

// Built-in reference geometries A..E with their billet blanks. Billet heights
// are volume-matched to the target at pipeline time.
struct GeometryPreset {
    char id = 'B';
    ShapeSpec shape;
    ShapeSpec billet_section;  // height replaced by the volume-matched value
};

GeometryPreset geometry_preset(char id);

struct SweepGrid {
    double start = 0.1;
    double stop = 20.0;
    double step = 0.1;
};

struct PipelineOptions {
    char geometry = 'B';
    std::optional<ShapeSpec> custom_shape;
    std::optional<std::filesystem::path> stl_path;
    std::optional<ShapeSpec> custom_billet;

    double plan_layer_step = 0.1;     // slicing step feeding the planner
    double compare_layer_step = 1.0;  // comparison-cloud spacing
    size_t points_per_layer = 400;

    std::string strategy = "auto";  // auto | envelope | gradient
    PlannerConfig planner;
    ClassifierTolerances classifier_tol;
    EndEffectorSpec effector;

    double rebound_eps = 0.3;
    size_t sim_angles = 400;
    double sim_dz = 0.5;

    SweepGrid sweep_grid;
    std::filesystem::path out_dir = "out";
};

struct PipelineResult {
    LayeredContourCloud target_plan;     // dense planning cloud
    LayeredContourCloud target_compare;  // comparison cloud
    ClassificationReport classification;
    Strategy strategy = Strategy::Envelope;
    KneadingProgram program;
    PointCloud ideal;
    RegistrationCurve ideal_curve;

    LayeredContourCloud formed;
    double sim_volume_drift = 0.0;
    RegistrationCurve formed_curve;
    PointCloud compensated;
    RegistrationCurve compensated_curve;

    double target_area = 0.0;
    std::vector<std::pair<int, double>> area_series;  // cycle -> lateral area
    ErrorStats error_stats;                           // formed vs ideal against the target
};

// Volume of a layered cloud from its shoelace section areas.
double cloud_volume(const LayeredContourCloud& cloud);

// Runs the full desk-scale workflow for one geometry.
PipelineResult run_pipeline(const PipelineOptions& options);

// Writes every stage artifact (clouds, curves, program, report, plots) into
// options.out_dir.
void write_pipeline_outputs(const PipelineOptions& options, const PipelineResult& result);

// Target cloud builders shared by CLI stages.
LayeredContourCloud build_target(const PipelineOptions& options, double layer_step);

std::string pipeline_report_json(const PipelineOptions& options, const PipelineResult& result);

}  // namespace kneadforge
