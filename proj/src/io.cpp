#include "shapesense/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace shapesense {

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(context + ": cannot parse number '" + s + "'");
    }
}

}  // namespace

std::vector<Point2> read_polygon_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open polygon fixture '" + path + "'");
    std::vector<Point2> vertices;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'x,y'");
        const std::string ctx = path + ":" + std::to_string(line_no);
        vertices.push_back({parse_double(fields[0], ctx), parse_double(fields[1], ctx)});
    }
    return vertices;
}

void write_polygon_csv(const std::string& path, const std::vector<Point2>& vertices) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    for (const auto& v : vertices)
        out << format_double(v.x) << ',' << format_double(v.y) << '\n';
}

void write_traces_csv(const std::string& path, const std::vector<DistanceTrace>& traces) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "sensor_id,t,reading\n";
    for (const auto& trace : traces) {
        for (const auto& s : trace.samples) {
            if (s.dropped) continue;  // lost report: the row never arrives
            out << trace.sensor_id << ',' << format_double(s.t) << ',';
            if (s.reading) out << format_double(*s.reading);
            out << '\n';
        }
    }
}

std::vector<DistanceTrace> read_traces_csv(const std::string& path, double speed,
                                           double dt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open traces file '" + path + "'");
    std::vector<DistanceTrace> traces;
    std::string line;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'sensor_id,t,reading'");
        const std::string ctx = path + ":" + std::to_string(line_no);
        const int id = static_cast<int>(parse_double(fields[0], ctx));
        const double t = parse_double(fields[1], ctx);
        if (traces.empty() || traces.back().sensor_id != id) {
            DistanceTrace trace;
            trace.sensor_id = id;
            trace.speed = speed;
            trace.dt = dt;
            traces.push_back(std::move(trace));
        }
        auto& samples = traces.back().samples;
        // Absent rows are lost reports; reinsert them as gap markers.
        while (!samples.empty() && t - samples.back().t > 1.5 * dt) {
            TraceSample gap;
            gap.t = samples.back().t + dt;
            gap.dropped = true;
            samples.push_back(gap);
        }
        TraceSample s;
        s.t = t;
        if (!fields[2].empty()) s.reading = parse_double(fields[2], ctx);
        samples.push_back(s);
    }
    return traces;
}

void write_samples_csv(const std::string& path, const SampleSet& samples) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "sensor_id,kind,l_d,s_d_left,s_d_right\n";
    for (const auto& w : samples.whole)
        out << w.sensor_id << ",WHOLE," << format_double(w.l_d) << ','
            << format_double(w.s_d) << ",\n";
    for (const auto& s : samples.slopes)
        out << s.sensor_id << ",SLOPE,," << format_double(s.s_d) << ",\n";
    for (const auto& v : samples.vertices)
        out << v.sensor_id << ",VERTEX,," << format_double(v.s_left) << ','
            << format_double(v.s_right) << '\n';
    for (const auto& ev : samples.edge_vertex) {
        const double left = ev.whole_is_left ? ev.s_whole : ev.s_other;
        const double right = ev.whole_is_left ? ev.s_other : ev.s_whole;
        out << ev.sensor_id << ",EDGEVERTEX," << format_double(ev.l_d) << ','
            << format_double(left) << ',' << format_double(right) << '\n';
    }
}

SampleSet read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open samples file '" + path + "'");
    SampleSet set;
    std::string line;
    std::getline(in, line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 5)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 5 fields");
        const std::string ctx = path + ":" + std::to_string(line_no);
        const int id = static_cast<int>(parse_double(fields[0], ctx));
        const std::string& kind = fields[1];
        if (kind == "WHOLE") {
            set.whole.push_back(
                {parse_double(fields[2], ctx), parse_double(fields[3], ctx), id, -1});
        } else if (kind == "SLOPE") {
            set.slopes.push_back({parse_double(fields[3], ctx), id, -1});
        } else if (kind == "VERTEX") {
            set.vertices.push_back({parse_double(fields[3], ctx),
                                    parse_double(fields[4], ctx), id, -1, -1});
        } else if (kind == "EDGEVERTEX") {
            const double l_d = parse_double(fields[2], ctx);
            const double left = parse_double(fields[3], ctx);
            const double right = parse_double(fields[4], ctx);
            // The shared segment's slope is written bit-exact on the side
            // the whole edge occupies; recover that side by matching a
            // WHOLE row of the sensor with the same duration and slope.
            bool whole_is_left = true;
            bool matched = false;
            for (const auto& w : set.whole) {
                if (w.sensor_id != id || w.l_d != l_d) continue;
                if (w.s_d == left) {
                    whole_is_left = true;
                    matched = true;
                    break;
                }
                if (w.s_d == right) {
                    whole_is_left = false;
                    matched = true;
                }
            }
            (void)matched;
            set.edge_vertex.push_back({l_d, whole_is_left ? left : right,
                                       whole_is_left ? right : left, whole_is_left, id});
        } else {
            throw ConfigError(ctx + ": unknown sample kind '" + kind + "'");
        }
    }
    return set;
}

void write_histogram_csv(const std::string& path, const Histogram& hist) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "bin_lo,bin_hi,count\n";
    const double width = std::max(hist.hi - hist.lo, 1e-12);
    for (int b = 0; b < hist.n_sub; ++b) {
        out << format_double(hist.lo + width * b / hist.n_sub) << ','
            << format_double(hist.lo + width * (b + 1) / hist.n_sub) << ','
            << hist.counts[b] << '\n';
    }
}

namespace {

using nlohmann::ordered_json;

template <typename T>
T get_field(const ordered_json& j, const std::string& scope, const std::string& key,
            T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError(scope + "." + key + ": wrong type");
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }

    RunConfig cfg;
    if (!j.contains("target") || !j.at("target").is_string())
        throw ConfigError(path + ": missing string field 'target'");
    cfg.target_path = j.at("target").get<std::string>();
    // Relative fixture paths resolve against the config file's directory.
    if (std::filesystem::path(cfg.target_path).is_relative())
        cfg.target_path =
            (std::filesystem::path(path).parent_path() / cfg.target_path).string();
    cfg.rounded_radius = get_field(j, "config", "rounded_radius", 0.0);
    cfg.fleet.seed = get_field<std::uint64_t>(j, "config", "seed", 1);

    const ordered_json fleet = j.contains("fleet") ? j.at("fleet") : ordered_json::object();
    cfg.fleet.n_sensors = get_field(fleet, "fleet", "n_sensors", 1000);
    cfg.fleet.speed = get_field(fleet, "fleet", "speed", 0.1);
    cfg.fleet.dt = get_field(fleet, "fleet", "dt", 1.0);
    const double r_max = get_field(fleet, "fleet", "r_max", 100.0);
    const double theta_max = get_field(fleet, "fleet", "theta_max", kPi / 2.0);
    cfg.fleet.region.radius = get_field(fleet, "fleet", "region_radius", 100.0);
    cfg.fleet.threads = get_field(fleet, "fleet", "threads", 0);
    if (cfg.fleet.n_sensors < 0) throw ConfigError("fleet.n_sensors: must be >= 0");
    if (!(cfg.fleet.speed > 0.0)) throw ConfigError("fleet.speed: must be > 0");
    if (!(cfg.fleet.dt > 0.0)) throw ConfigError("fleet.dt: must be > 0");
    if (!(cfg.fleet.region.radius > 0.0))
        throw ConfigError("fleet.region_radius: must be > 0");
    try {
        cfg.fleet.sensor = SectorSensor(r_max, theta_max);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("fleet sensor: ") + e.what());
    }

    const ordered_json noise = j.contains("noise") ? j.at("noise") : ordered_json::object();
    cfg.noise.sigma_slope = get_field(noise, "noise", "sigma_slope", 0.0);
    cfg.noise.dropout_prob = get_field(noise, "noise", "dropout_prob", 0.0);
    if (cfg.noise.sigma_slope < 0.0) throw ConfigError("noise.sigma_slope: must be >= 0");
    if (cfg.noise.dropout_prob < 0.0 || cfg.noise.dropout_prob >= 1.0)
        throw ConfigError("noise.dropout_prob: must be in [0, 1)");

    if (j.contains("route")) {
        const std::string mode = get_field<std::string>(j.at("route"), "route", "mode",
                                                        "straight");
        if (mode == "one-turn")
            cfg.one_turn_routes = true;
        else if (mode != "straight")
            throw ConfigError("route.mode: expected 'straight' or 'one-turn'");
    }
    cfg.fleet.one_turn_routes = cfg.one_turn_routes;

    const ordered_json analysis =
        j.contains("analysis") ? j.at("analysis") : ordered_json::object();
    cfg.analysis.tol_slope = get_field(analysis, "analysis", "tol_slope", 1e-3);
    cfg.analysis.min_len = get_field(analysis, "analysis", "min_len", 3);
    cfg.analysis.curve_tol = get_field(analysis, "analysis", "curve_tol", 1e-7);
    cfg.analysis.merge_gap_segments =
        get_field(analysis, "analysis", "merge_gap_segments", true);
    cfg.analysis.r_max = r_max;
    if (!(cfg.analysis.tol_slope > 0.0)) throw ConfigError("analysis.tol_slope: must be > 0");
    if (cfg.analysis.min_len < 2) throw ConfigError("analysis.min_len: must be >= 2");

    const ordered_json est =
        j.contains("estimator") ? j.at("estimator") : ordered_json::object();
    cfg.estimator.signed_branch_guards =
        get_field(est, "estimator", "signed_branch_guards", true);
    cfg.estimator.k_sub = get_field(est, "estimator", "k_sub", 7.0);
    cfg.estimator.k_sub_angles = get_field(est, "estimator", "k_sub_angles", 1.5);
    cfg.estimator.min_expected_detections =
        get_field(est, "estimator", "min_expected_detections", 8.0);
    cfg.estimator.threshold_scale = get_field(est, "estimator", "threshold_scale", 2.0);
    cfg.estimator.min_cluster_count = get_field(est, "estimator", "min_cluster_count", 6);
    cfg.estimator.noise_bin_divisor = get_field(est, "estimator", "noise_bin_divisor", 4.0);
    cfg.estimator.connection_threshold =
        get_field(est, "estimator", "connection_threshold", 0.15);
    cfg.estimator.connection_rel = get_field(est, "estimator", "connection_rel", 0.3);
    cfg.estimator.length_cap_factor = get_field(est, "estimator", "length_cap_factor", 2.0);
    if (!(cfg.estimator.k_sub >= 1.0)) throw ConfigError("estimator.k_sub: must be >= 1");
    if (!(cfg.estimator.k_sub_angles >= 1.0))
        throw ConfigError("estimator.k_sub_angles: must be >= 1");
    if (!(cfg.estimator.noise_bin_divisor >= 1.0))
        throw ConfigError("estimator.noise_bin_divisor: must be >= 1");

    cfg.output_dir = get_field<std::string>(j, "config", "output_dir", "out");
    cfg.dump_traces = get_field(j, "config", "dump_traces", false);
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["target"] = cfg.target_path;
    if (cfg.rounded_radius > 0.0) j["rounded_radius"] = cfg.rounded_radius;
    j["seed"] = cfg.fleet.seed;
    j["fleet"] = {{"n_sensors", cfg.fleet.n_sensors},
                  {"speed", cfg.fleet.speed},
                  {"dt", cfg.fleet.dt},
                  {"r_max", cfg.fleet.sensor.r_max},
                  {"theta_max", cfg.fleet.sensor.theta_max},
                  {"region_radius", cfg.fleet.region.radius},
                  {"threads", cfg.fleet.threads}};
    j["noise"] = {{"sigma_slope", cfg.noise.sigma_slope},
                  {"dropout_prob", cfg.noise.dropout_prob}};
    j["route"] = {{"mode", cfg.one_turn_routes ? "one-turn" : "straight"}};
    j["analysis"] = {{"tol_slope", cfg.analysis.tol_slope},
                     {"min_len", cfg.analysis.min_len},
                     {"curve_tol", cfg.analysis.curve_tol},
                     {"merge_gap_segments", cfg.analysis.merge_gap_segments}};
    j["estimator"] = {{"signed_branch_guards", cfg.estimator.signed_branch_guards},
                      {"k_sub", cfg.estimator.k_sub},
                      {"k_sub_angles", cfg.estimator.k_sub_angles},
                      {"min_expected_detections", cfg.estimator.min_expected_detections},
                      {"threshold_scale", cfg.estimator.threshold_scale},
                      {"min_cluster_count", cfg.estimator.min_cluster_count},
                      {"noise_bin_divisor", cfg.estimator.noise_bin_divisor},
                      {"connection_threshold", cfg.estimator.connection_threshold},
                      {"connection_rel", cfg.estimator.connection_rel},
                      {"length_cap_factor", cfg.estimator.length_cap_factor}};
    j["output_dir"] = cfg.output_dir;
    j["dump_traces"] = cfg.dump_traces;
    return j.dump(2);
}

}  // namespace shapesense
