#include "shapesense/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace shapesense {

using nlohmann::ordered_json;

SensingTarget load_target(const RunConfig& config) {
    const auto vertices = read_polygon_csv(config.target_path);
    ConvexPolygon poly = validate_polygon(vertices);
    if (config.rounded_radius > 0.0)
        return RoundedPolygon(std::move(poly), config.rounded_radius);
    return poly;
}

SampleSet analyze_fleet(const std::vector<DistanceTrace>& traces,
                        const RunConfig& config) {
    const int n = static_cast<int>(traces.size());
    int threads = config.fleet.threads;
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        threads = std::clamp(threads, 1, 8);
    }
    threads = std::max(1, std::min(threads, n));

    std::vector<SampleSet> partial(threads);
    const auto work = [&](int slot, int begin, int end) {
        for (int i = begin; i < end; ++i) {
            Rng noise_rng = sensor_stream(config.fleet.seed,
                                          static_cast<std::uint64_t>(traces[i].sensor_id),
                                          /*salt=*/1);
            analyze_trace(traces[i], config.analysis, config.noise.sigma_slope,
                          noise_rng, partial[slot]);
        }
    };
    if (threads <= 1) {
        if (n > 0) work(0, 0, n);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(n, begin + chunk);
            if (begin < end) pool.emplace_back(work, t, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    SampleSet merged;
    for (const auto& p : partial) {
        merged.whole.insert(merged.whole.end(), p.whole.begin(), p.whole.end());
        merged.slopes.insert(merged.slopes.end(), p.slopes.begin(), p.slopes.end());
        merged.vertices.insert(merged.vertices.end(), p.vertices.begin(), p.vertices.end());
        merged.edge_vertex.insert(merged.edge_vertex.end(), p.edge_vertex.begin(),
                                  p.edge_vertex.end());
        merged.diagnostics.discarded_short += p.diagnostics.discarded_short;
        merged.diagnostics.merged_gaps += p.diagnostics.merged_gaps;
        merged.diagnostics.reports += p.diagnostics.reports;
        merged.diagnostics.detection_reports += p.diagnostics.detection_reports;
    }
    return merged;
}

EstimateReport estimate_from_samples(const SampleSet& samples, const RunConfig& config) {
    EstimateReport report;
    report.n_whole = static_cast<long>(samples.whole.size());
    report.n_slope = static_cast<long>(samples.slopes.size());
    report.n_vertex = static_cast<long>(samples.vertices.size());
    report.n_edge_vertex = static_cast<long>(samples.edge_vertex.size());
    report.diagnostics = samples.diagnostics;

    const double v = config.fleet.speed;
    const double theta_max = config.fleet.sensor.theta_max;
    const double length_cap = config.estimator.length_cap_factor * config.fleet.region.radius;
    const BranchGuards guards = config.estimator.signed_branch_guards
                                    ? BranchGuards::Signed
                                    : BranchGuards::Loose;
    const bool noisy = config.noise.sigma_slope > 0.0 || config.noise.dropout_prob > 0.0;

    std::vector<double> length_candidates;
    for (const auto& w : samples.whole) {
        const auto cands = candidate_lengths(w.l_d, w.s_d, v, theta_max, guards);
        if (cands.empty()) ++report.empty_candidate_sets;
        for (const auto& c : cands)
            if (c.value > 0.0 && c.value <= length_cap)
                length_candidates.push_back(c.value);
    }
    std::vector<double> angle_candidates;
    for (const auto& vs : samples.vertices) {
        const auto cands = candidate_angles(vs.s_left, vs.s_right, v, theta_max, guards);
        angle_candidates.insert(angle_candidates.end(), cands.begin(), cands.end());
    }

    ClusterParams cluster_params;
    cluster_params.k_sub = config.estimator.k_sub;
    cluster_params.threshold_scale = config.estimator.threshold_scale;
    cluster_params.min_cluster_count = config.estimator.min_cluster_count;
    cluster_params.bin_divisor = noisy ? config.estimator.noise_bin_divisor : 1.0;
    ClusterParams angle_params = cluster_params;
    angle_params.k_sub = config.estimator.k_sub_angles;

    const DetectionModel model{config.fleet.region, config.fleet.sensor,
                               config.fleet.n_sensors};

    if (!length_candidates.empty()) {
        report.length_hist = cluster_candidates(length_candidates, cluster_params);
        report.lengths = estimate_counts(
            report.n_whole, report.length_hist,
            [&](double lam) { return model.expected_whole_detections(lam); },
            config.estimator.min_expected_detections);
    }
    if (!angle_candidates.empty()) {
        report.angle_hist = cluster_candidates(angle_candidates, angle_params);
        report.angles = estimate_counts(
            report.n_vertex, report.angle_hist,
            [&](double g) { return model.expected_vertex_detections(g); },
            config.estimator.min_expected_detections);
    }

    report.pairs = pair_ratio_matrix(samples.edge_vertex, report.lengths, report.angles,
                                     model, v, theta_max, config.fleet.dt, guards);

    if (!report.lengths.empty() && !report.angles.empty()) {
        AssemblyParams assembly;
        assembly.connection_threshold = config.estimator.connection_threshold;
        assembly.connection_rel = config.estimator.connection_rel;
        try {
            report.shape = assemble_shape(report.lengths, report.angles, report.pairs,
                                          assembly);
        } catch (const NoConsistentShape& e) {
            report.shape_error = e.what();
        }
    } else {
        report.shape_error = "no adopted clusters";
    }
    return report;
}

namespace {

ordered_json histogram_to_json(const Histogram& h) {
    return {{"lo", h.lo},         {"hi", h.hi},   {"n_sub", h.n_sub},
            {"total", h.total},   {"threshold", h.threshold}};
}

ordered_json clusters_to_json(const std::vector<ClusterEstimate>& clusters) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : clusters) {
        ordered_json item = {{"center", c.center},
                             {"count", c.count},
                             {"multiplicity", c.multiplicity}};
        if (c.undetectable) item["undetectable"] = true;
        arr.push_back(item);
    }
    return arr;
}

}  // namespace

std::string report_to_json(const EstimateReport& report, const RunConfig& config) {
    ordered_json j;
    j["seed"] = config.fleet.seed;
    j["config"] = ordered_json::parse(run_config_to_json(config));
    j["samples"] = {{"whole_edge", report.n_whole},
                    {"slope_only", report.n_slope},
                    {"vertex", report.n_vertex},
                    {"edge_vertex", report.n_edge_vertex},
                    {"empty_candidate_sets", report.empty_candidate_sets},
                    {"discarded_short", report.diagnostics.discarded_short},
                    {"merged_gaps", report.diagnostics.merged_gaps},
                    {"reports", report.diagnostics.reports},
                    {"detection_reports", report.diagnostics.detection_reports}};
    j["length_histogram"] = histogram_to_json(report.length_hist);
    j["angle_histogram"] = histogram_to_json(report.angle_hist);
    j["length_clusters"] = clusters_to_json(report.lengths);
    j["angle_clusters"] = clusters_to_json(report.angles);
    j["pair_matrix"] = {{"lengths", report.pairs.lengths},
                        {"angles", report.pairs.angles},
                        {"raw", report.pairs.raw},
                        {"expected", report.pairs.expected},
                        {"ratio", report.pairs.ratio}};
    if (report.shape) {
        j["shape"] = {{"edges", report.shape->edge_lengths},
                      {"angles", report.shape->vertex_angles},
                      {"closure_residual", report.shape->closure_residual},
                      {"perimeter", report.shape->perimeter},
                      {"ambiguous", report.shape->ambiguous}};
        if (!report.shape->note.empty()) j["shape"]["note"] = report.shape->note;
    } else {
        j["shape"] = {{"error", report.shape_error}};
    }
    return j.dump(2) + "\n";
}

EstimateReport run_pipeline(const RunConfig& config) {
    namespace fs = std::filesystem;
    const SensingTarget target = load_target(config);
    fs::create_directories(config.output_dir);

    const FleetResult fleet = simulate_fleet(config.fleet, target, config.noise);

    {
        std::ofstream manifest(fs::path(config.output_dir) / "manifest.json");
        ordered_json m;
        m["seed"] = config.fleet.seed;
        m["config"] = ordered_json::parse(run_config_to_json(config));
        m["n_traces"] = fleet.traces.size();
        manifest << m.dump(2) << "\n";
    }
    if (config.dump_traces)
        write_traces_csv((fs::path(config.output_dir) / "traces.csv").string(),
                         fleet.traces);

    const SampleSet samples = analyze_fleet(fleet.traces, config);
    write_samples_csv((fs::path(config.output_dir) / "samples.csv").string(), samples);

    EstimateReport report = estimate_from_samples(samples, config);
    if (report.length_hist.n_sub > 0)
        write_histogram_csv((fs::path(config.output_dir) / "lengths_hist.csv").string(),
                            report.length_hist);
    if (report.angle_hist.n_sub > 0)
        write_histogram_csv((fs::path(config.output_dir) / "angles_hist.csv").string(),
                            report.angle_hist);
    std::ofstream out(fs::path(config.output_dir) / "report.json");
    out << report_to_json(report, config);
    return report;
}

}  // namespace shapesense
