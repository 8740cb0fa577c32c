#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapesense/estimator.hpp"
#include "shapesense/simulator.hpp"
#include "shapesense/trace_analysis.hpp"

namespace shapesense {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Polygon fixtures: one "x,y" vertex per line, counterclockwise, '#' comments.
std::vector<Point2> read_polygon_csv(const std::string& path);
void write_polygon_csv(const std::string& path, const std::vector<Point2>& vertices);

// Trace dump: header sensor_id,t,reading; empty reading field for
// NO_DETECTION, dropped reports are absent rows. This file (plus the run
// manifest) is the only simulator-to-estimator channel.
void write_traces_csv(const std::string& path, const std::vector<DistanceTrace>& traces);
std::vector<DistanceTrace> read_traces_csv(const std::string& path, double speed, double dt);

// Samples export: sensor_id,kind,l_d,s_d_left,s_d_right with kind in
// {WHOLE, SLOPE, VERTEX, EDGEVERTEX}.
void write_samples_csv(const std::string& path, const SampleSet& samples);
SampleSet read_samples_csv(const std::string& path);

void write_histogram_csv(const std::string& path, const Histogram& hist);

struct EstimatorConfig {
    bool signed_branch_guards = true;
    double k_sub = 7.0;         // candidates per sub-interval, length voting
    double k_sub_angles = 1.5;  // angle candidates are exact atoms; bin finely
    double min_expected_detections = 8.0;
    double threshold_scale = 2.0;
    int min_cluster_count = 6;
    double noise_bin_divisor = 4.0;  // applied when the run has sensing errors
    double connection_threshold = 0.15;
    double connection_rel = 0.3;
    double length_cap_factor = 2.0;  // candidates above factor*region radius are discarded
};

struct RunConfig {
    std::string target_path;
    double rounded_radius = 0.0;  // > 0: treat the fixture as the core of an arc-corner target
    FleetConfig fleet;
    NoiseConfig noise;
    SegmentationParams analysis;
    EstimatorConfig estimator;
    bool one_turn_routes = false;
    std::string output_dir = "out";
    bool dump_traces = false;
};

RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

}  // namespace shapesense
