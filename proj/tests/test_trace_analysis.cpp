#include <doctest.h>

#include <cmath>

#include "shapesense/analytic.hpp"
#include "shapesense/trace_analysis.hpp"
#include "support/oracles.hpp"

using namespace shapesense;
using namespace shapesense::testing;

TEST_SUITE_BEGIN("trace-analysis");

namespace {

DistanceTrace make_trace(const std::vector<std::optional<double>>& readings,
                         double dt = 1.0) {
    DistanceTrace trace;
    trace.sensor_id = 0;
    trace.speed = 0.1;
    trace.dt = dt;
    for (std::size_t i = 0; i < readings.size(); ++i)
        trace.samples.push_back({static_cast<double>(i) * dt, readings[i], false});
    return trace;
}

SegmentationParams params_for(double r_max = 100.0) {
    SegmentationParams p;
    p.r_max = r_max;
    return p;
}

const auto triangle = [] {
    return validate_polygon({{-14.43, -8.33}, {28.87, -8.33}, {-14.43, 16.67}});
}();

DistanceTrace simulate_straight(const ConvexPolygon& poly, double phi, double offset,
                                double s0, double s1) {
    FleetConfig fleet;
    fleet.sensor = SectorSensor(100.0, kPi / 2);
    VehicleRoute route;
    route.phi = phi;
    route.offset = offset;
    route.s_start = s0;
    route.s_end = s1;
    Rng rng(3);
    return simulate_trace(route, fleet, SensingTarget{poly}, NoiseConfig{}, rng);
}

}  // namespace

TEST_CASE("single edge crossing gives one linear segment with the analytic slope") {
    // Route sweeping only the bottom edge of the triangle from below.
    const auto trace = simulate_straight(triangle, 0.15, -40.0, -160.0, 160.0);
    const auto segments = segment_trace(trace, params_for());

    int linear = 0;
    const Segment* seg = nullptr;
    for (const auto& s : segments)
        if (s.kind == SegmentKind::Linear && s.n_reports > 50) {
            ++linear;
            seg = &s;
        }
    REQUIRE(seg != nullptr);
    CHECK(linear == 1);

    // Analytic truth for the same route.
    VehicleRoute route;
    route.phi = 0.15;
    route.offset = -40.0;
    route.s_start = -160.0;
    route.s_end = 160.0;
    const auto analytic = analytic_trace(route, SectorSensor(100.0, kPi / 2), triangle, 0.1);
    REQUIRE(!analytic.whole_edges.empty());
    const auto& truth = analytic.whole_edges.front();
    CHECK(std::abs(seg->slope - truth.s_d) < 1e-6);
    CHECK(std::abs((seg->t_e - seg->t_s) - truth.l_d) <= 4.0 + 1e-9);
}

TEST_CASE("vertex crossing produces linear, curve, linear") {
    // Find a route whose exact decomposition is edge, vertex arc, edge,
    // then require the same linear-curve-linear shape from the sampled trace.
    const SectorSensor sensor(100.0, kPi / 2);
    bool tested = false;
    for (double offset = -45.0; offset <= 45.0 && !tested; offset += 2.5) {
        VehicleRoute route;
        route.phi = 0.9;
        route.offset = offset;
        route.s_start = -150.0;
        route.s_end = 150.0;
        const auto analytic = analytic_trace(route, sensor, triangle, 0.1);
        bool has_arc = false;
        for (std::size_t i = 0; i + 2 < analytic.episodes.size(); ++i)
            if (analytic.episodes[i].kind == EpisodeKind::Edge &&
                analytic.episodes[i + 1].kind == EpisodeKind::VertexArc &&
                analytic.episodes[i + 1].s_b - analytic.episodes[i + 1].s_a > 2.0 &&
                analytic.episodes[i + 2].kind == EpisodeKind::Edge)
                has_arc = true;
        if (!has_arc) continue;
        tested = true;
        const auto trace = simulate_straight(triangle, 0.9, offset, -150.0, 150.0);
        std::string shape;
        for (const auto& s : segment_trace(trace, params_for())) {
            if (s.kind == SegmentKind::Linear && s.n_reports >= 3) shape += 'L';
            if (s.kind == SegmentKind::Curve && s.n_reports >= 5) shape += 'C';
        }
        CHECK(shape.find("LCL") != std::string::npos);
    }
    CHECK(tested);
}

TEST_CASE("all empty trace yields no segments") {
    const auto trace = make_trace(std::vector<std::optional<double>>(200, std::nullopt));
    CHECK(segment_trace(trace, params_for()).empty());
}

TEST_CASE("zero runs split pairs; dropout behavior depends on merging") {
    // Two slopes joined by an interior zero run never pair.
    std::vector<std::optional<double>> rs;
    for (int i = 0; i < 30; ++i) rs.push_back(30.0 - i);
    for (int i = 0; i < 10; ++i) rs.push_back(0.0);
    for (int i = 0; i < 30; ++i) rs.push_back(1.0 + 2.0 * i);
    auto trace = make_trace(rs);
    SampleSet set;
    Rng rng(1);
    analyze_trace(trace, params_for(), 0.0, rng, set);
    CHECK(set.vertices.empty());

    // One lost report inside a linear stretch: slope-only pieces, merged
    // back into a whole observation when merging is on.
    std::vector<std::optional<double>> line;
    for (int i = 0; i < 80; ++i) line.push_back(90.0 - 0.9 * i);
    auto gap_trace = make_trace(line);
    gap_trace.samples[40].dropped = true;

    SegmentationParams merged = params_for();
    SampleSet with_merge;
    analyze_trace(gap_trace, merged, 0.0, rng, with_merge);
    CHECK(with_merge.whole.empty());  // flanked by trace truncation, not events
    bool found_merged = false;
    for (const auto& s : segment_trace(gap_trace, merged))
        if (s.merged && s.n_reports == 79) found_merged = true;
    CHECK(found_merged);

    SegmentationParams split = params_for();
    split.merge_gap_segments = false;
    const auto segs = segment_trace(gap_trace, split);
    int linear = 0;
    for (const auto& s : segs) linear += s.kind == SegmentKind::Linear;
    CHECK(linear == 2);
    SampleSet no_merge;
    analyze_trace(gap_trace, split, 0.0, rng, no_merge);
    REQUIRE(no_merge.vertices.size() == 1);  // paired across the gap
    CHECK(no_merge.vertices[0].s_left == doctest::Approx(-0.9));
}

TEST_CASE("whole-edge events: range-cap and zero boundaries only give slopes") {
    // Enters detection at r_max and leaves by hitting zero: slope-only.
    std::vector<std::optional<double>> rs;
    rs.push_back(std::nullopt);
    for (int i = 0; i < 120; ++i) rs.push_back(99.7 - 0.9 * i);
    while (!rs.empty() && rs.back() && *rs.back() < 0) rs.pop_back();
    rs.back() = 0.0;
    rs.push_back(0.0);
    const auto trace = make_trace(rs);
    SampleSet set;
    Rng rng(1);
    analyze_trace(trace, params_for(), 0.0, rng, set);
    CHECK(set.whole.empty());
    CHECK(set.slopes.size() == 1);

    // Bounded by slope changes at positive readings: a whole-edge sample.
    std::vector<std::optional<double>> ws;
    for (int i = 0; i <= 40; ++i) ws.push_back(80.0 - 1.5 * i);
    for (int i = 1; i <= 40; ++i) ws.push_back(20.0 - 0.1 * i);
    for (int i = 1; i <= 40; ++i) ws.push_back(16.0 + 1.2 * i);
    const auto wtrace = make_trace(ws);
    SampleSet wset;
    analyze_trace(wtrace, params_for(), 0.0, rng, wset);
    REQUIRE(wset.whole.size() == 1);
    CHECK(wset.whole[0].s_d == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(wset.whole[0].l_d == doctest::Approx(40.0).epsilon(0.03));
    CHECK(wset.vertices.size() == 2);
}

TEST_CASE("slope noise transform") {
    std::vector<Segment> segments(1);
    segments[0].kind = SegmentKind::Linear;
    segments[0].slope = 0.0;

    Rng rng(42);
    auto copy = segments;
    apply_slope_noise(copy, 0.0, rng);
    CHECK(copy[0].slope == 0.0);

    // One draw with sigma tiny: slope becomes tan(eps).
    Rng rng2(43);
    const double eps = rng2.normal(0.0, 0.001);
    Rng rng3(43);
    apply_slope_noise(segments, 0.001, rng3);
    CHECK(segments[0].slope == doctest::Approx(std::tan(eps)).epsilon(1e-12));

    // Distribution: arctan of noisy slopes minus arctan of clean slopes is
    // normal with the configured sigma.
    const double sigma = 0.05;
    std::vector<double> deltas;
    Rng rng4(44);
    for (int i = 0; i < 10000; ++i) {
        std::vector<Segment> s(1);
        s[0].kind = SegmentKind::Linear;
        s[0].slope = 0.7;
        apply_slope_noise(s, sigma, rng4);
        deltas.push_back(std::atan(s[0].slope) - std::atan(0.7));
    }
    const double p = ks_p_value(deltas, [&](double x) {
        return 0.5 * (1.0 + std::erf(x / (sigma * std::sqrt(2.0))));
    });
    CHECK(p > 0.01);
}

TEST_CASE("segments cover the whole detection support") {
    Rng rng(816);
    const DiskRegion region{{0, 0}, 100.0};
    const SectorSensor sensor(100.0, kPi / 2);
    FleetConfig fleet;
    fleet.sensor = sensor;
    for (int trial = 0; trial < 60; ++trial) {
        const auto poly = random_convex_polygon(rng);
        Rng stream(rng.next_u64());
        const auto route = sample_route(region, sensor, stream);
        Rng noise_rng(5);
        const auto trace =
            simulate_trace(route, fleet, SensingTarget{poly},
                           NoiseConfig{0.0, 1e-3}, noise_rng);
        const auto segments = segment_trace(trace, params_for());
        std::vector<char> covered(trace.samples.size(), 0);
        for (const auto& seg : segments) {
            for (auto [a, b] : seg.parts)
                for (int i = a; i <= b; ++i) covered[i] = 1;
            // A merged segment spans its interior gap instants.
            if (seg.merged)
                for (int i = seg.parts.front().first; i <= seg.parts.back().second; ++i)
                    if (trace.samples[i].dropped) covered[i] = 1;
        }
        for (std::size_t i = 0; i < trace.samples.size(); ++i) {
            const auto& s = trace.samples[i];
            const bool should = s.dropped || (s.reading.has_value());
            if (should) CHECK(covered[i] == 1);
        }
    }
}

TEST_CASE("gap merging never joins segments with inconsistent slopes") {
    Rng rng(817);
    const DiskRegion region{{0, 0}, 100.0};
    const SectorSensor sensor(100.0, kPi / 2);
    FleetConfig fleet;
    fleet.sensor = sensor;
    SegmentationParams params = params_for();
    for (int trial = 0; trial < 40; ++trial) {
        const auto poly = random_convex_polygon(rng);
        Rng stream(rng.next_u64());
        const auto route = sample_route(region, sensor, stream);
        Rng noise_rng(6);
        const auto trace = simulate_trace(route, fleet, SensingTarget{poly},
                                          NoiseConfig{0.0, 2e-3}, noise_rng);
        for (const auto& seg : segment_trace(trace, params)) {
            if (!seg.merged) continue;
            // Refit each part separately; the slopes must agree.
            for (const auto& part : seg.parts) {
                if (part.second - part.first < 2) continue;
                double n = 0, st = 0, sr = 0, stt = 0, str = 0;
                for (int i = part.first; i <= part.second; ++i) {
                    const double t = trace.samples[i].t;
                    const double r = *trace.samples[i].reading;
                    n += 1; st += t; sr += r; stt += t * t; str += t * r;
                }
                const double slope = (n * str - st * sr) / (n * stt - st * st);
                CHECK(std::abs(slope - seg.slope) <= params.tol_slope + 1e-9);
            }
        }
    }
}

TEST_SUITE_END();
