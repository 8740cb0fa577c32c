#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "shapesense/pipeline.hpp"

namespace fs = std::filesystem;
using namespace shapesense;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_sensors;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "Run configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Override the run seed");
    cmd->add_option("--n-sensors", opts.n_sensors, "Override the fleet size");
    cmd->add_option("--out", opts.out, "Override the output directory");
}

RunConfig resolve(const CommonOpts& opts) {
    RunConfig cfg = load_run_config(opts.config_path);
    if (opts.seed) cfg.fleet.seed = *opts.seed;
    if (opts.n_sensors) cfg.fleet.n_sensors = *opts.n_sensors;
    if (opts.out)
        cfg.output_dir = *opts.out;
    else if (const char* env = std::getenv("SHAPESENSE_OUT_DIR"))
        cfg.output_dir = (fs::path(env) / fs::path(cfg.output_dir).filename()).string();
    return cfg;
}

void print_report_summary(const EstimateReport& report) {
    std::cout << "samples: whole=" << report.n_whole << " slope=" << report.n_slope
              << " vertex=" << report.n_vertex << " edge-vertex=" << report.n_edge_vertex
              << "\n";
    std::cout << "length clusters:";
    for (const auto& c : report.lengths)
        std::cout << " " << c.center << " (count " << c.count << ", N " << c.multiplicity
                  << ")";
    std::cout << "\nangle clusters:";
    for (const auto& c : report.angles)
        std::cout << " " << c.center << " (count " << c.count << ", N " << c.multiplicity
                  << ")";
    std::cout << "\n";
    if (report.shape) {
        std::cout << "shape: edges [";
        for (std::size_t i = 0; i < report.shape->edge_lengths.size(); ++i)
            std::cout << (i ? ", " : "") << report.shape->edge_lengths[i];
        std::cout << "], closure residual " << report.shape->closure_residual
                  << (report.shape->ambiguous ? " (ambiguous)" : "") << "\n";
    } else {
        std::cout << "shape: " << report.shape_error << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convex-polygon shape estimation from location-blind distance traces"};
    app.require_subcommand(1);

    CommonOpts sim_opts, ana_opts, est_opts, run_opts;
    std::string traces_path, samples_path;

    auto* sim = app.add_subcommand("simulate", "Generate distance traces for a fleet");
    add_common(sim, sim_opts);

    auto* ana = app.add_subcommand("analyze", "Segment traces and extract samples");
    add_common(ana, ana_opts);
    ana->add_option("--traces", traces_path, "Input traces CSV")->required();

    auto* est = app.add_subcommand("estimate", "Estimate shape from extracted samples");
    add_common(est, est_opts);
    est->add_option("--samples", samples_path, "Input samples CSV")->required();

    auto* run = app.add_subcommand("run", "Full simulate-analyze-estimate pipeline");
    add_common(run, run_opts);

    auto* oracle = app.add_subcommand("oracle", "Independent validation checks");
    std::string kind;
    int trials = 1000;
    long lines = 100000;
    double lambda = 50.0, gamma = kPi / 2.0, r_max = 100.0, theta_max = kPi / 2.0;
    std::uint64_t oracle_seed = 1;
    oracle->add_option("kind", kind, "measure1|measure2|qd-mc|route-uniformity")
        ->required();
    oracle->add_option("--trials", trials, "Parameter sets for measure1");
    oracle->add_option("--lines", lines, "Sampled routes for MC oracles");
    oracle->add_option("--lambda", lambda, "Edge length for qd-mc");
    oracle->add_option("--gamma", gamma, "Vertex angle for measure2");
    oracle->add_option("--r-max", r_max, "Sensing radius for measure2");
    oracle->add_option("--theta-max", theta_max, "Sensing half-angle for measure2");
    oracle->add_option("--seed", oracle_seed, "Oracle RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            RunConfig cfg = resolve(sim_opts);
            const SensingTarget target = load_target(cfg);
            const FleetResult fleet = simulate_fleet(cfg.fleet, target, cfg.noise);
            fs::create_directories(cfg.output_dir);
            write_traces_csv((fs::path(cfg.output_dir) / "traces.csv").string(),
                             fleet.traces);
            std::ofstream manifest(fs::path(cfg.output_dir) / "manifest.json");
            manifest << "{\n  \"seed\": " << cfg.fleet.seed << ",\n  \"config\": "
                     << run_config_to_json(cfg) << "\n}\n";
            std::cout << "wrote " << fleet.traces.size() << " traces to "
                      << cfg.output_dir << "\n";
        } else if (ana->parsed()) {
            RunConfig cfg = resolve(ana_opts);
            const auto traces = read_traces_csv(traces_path, cfg.fleet.speed, cfg.fleet.dt);
            const SampleSet samples = analyze_fleet(traces, cfg);
            fs::create_directories(cfg.output_dir);
            write_samples_csv((fs::path(cfg.output_dir) / "samples.csv").string(),
                              samples);
            std::cout << "extracted " << samples.whole.size() << " whole-edge, "
                      << samples.vertices.size() << " vertex samples\n";
        } else if (est->parsed()) {
            RunConfig cfg = resolve(est_opts);
            const SampleSet samples = read_samples_csv(samples_path);
            const EstimateReport report = estimate_from_samples(samples, cfg);
            fs::create_directories(cfg.output_dir);
            std::ofstream out(fs::path(cfg.output_dir) / "report.json");
            out << report_to_json(report, cfg);
            if (report.length_hist.n_sub > 0)
                write_histogram_csv(
                    (fs::path(cfg.output_dir) / "lengths_hist.csv").string(),
                    report.length_hist);
            if (report.angle_hist.n_sub > 0)
                write_histogram_csv(
                    (fs::path(cfg.output_dir) / "angles_hist.csv").string(),
                    report.angle_hist);
            print_report_summary(report);
            if (!report.shape) return 2;
        } else if (run->parsed()) {
            RunConfig cfg = resolve(run_opts);
            const EstimateReport report = run_pipeline(cfg);
            print_report_summary(report);
            std::cout << "artifacts in " << cfg.output_dir << "\n";
            if (!report.shape) return 2;
        } else if (oracle->parsed()) {
            OracleResult res;
            if (kind == "measure1")
                res = oracle_measure1(trials, oracle_seed);
            else if (kind == "measure2")
                res = oracle_measure2(gamma, r_max, theta_max, lines, oracle_seed);
            else if (kind == "qd-mc")
                res = oracle_qd_mc(lambda, lines, oracle_seed);
            else if (kind == "route-uniformity")
                res = oracle_route_uniformity(lines, oracle_seed);
            else {
                std::cerr << "unknown oracle kind '" << kind << "'\n";
                return 1;
            }
            std::cout << (res.pass ? "[PASS] " : "[FAIL] ") << res.summary << "\n";
            return res.pass ? 0 : 3;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
