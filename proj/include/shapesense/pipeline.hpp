#pragma once

#include <optional>
#include <string>

#include "shapesense/io.hpp"

namespace shapesense {

struct EstimateReport {
    long n_whole = 0;
    long n_slope = 0;
    long n_vertex = 0;
    long n_edge_vertex = 0;
    long empty_candidate_sets = 0;
    AnalysisDiagnostics diagnostics;
    Histogram length_hist;
    Histogram angle_hist;
    std::vector<ClusterEstimate> lengths;
    std::vector<ClusterEstimate> angles;
    PairMatrix pairs;
    std::optional<ShapeHypothesis> shape;
    std::string shape_error;
};

SensingTarget load_target(const RunConfig& config);

// Per-sensor analysis with deterministic slope-noise streams.
SampleSet analyze_fleet(const std::vector<DistanceTrace>& traces,
                        const RunConfig& config);

EstimateReport estimate_from_samples(const SampleSet& samples, const RunConfig& config);

std::string report_to_json(const EstimateReport& report, const RunConfig& config);

// simulate -> analyze -> estimate, writing the manifest, samples,
// histograms and report (and optionally the traces) under output_dir.
EstimateReport run_pipeline(const RunConfig& config);

struct OracleResult {
    bool pass = false;
    std::string summary;
};

// Independent validation checks, also wired to the CLI `oracle` subcommand.
OracleResult oracle_measure1(int trials, std::uint64_t seed);
OracleResult oracle_measure2(double gamma, double r_max, double theta_max,
                             long lines, std::uint64_t seed);
OracleResult oracle_qd_mc(double lambda, long lines, std::uint64_t seed);
OracleResult oracle_route_uniformity(long samples, std::uint64_t seed);

// Quadrature evaluation of the whole-edge measure from its integral
// definition; the independent route against the closed form.
double measure_whole_edge_quadrature(double lambda, double r_max, double theta_max);

}  // namespace shapesense
