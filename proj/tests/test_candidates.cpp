#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shapesense/analytic.hpp"
#include "shapesense/estimator.hpp"
#include "support/oracles.hpp"

using namespace shapesense;
using namespace shapesense::testing;

TEST_SUITE_BEGIN("candidates");

namespace {

bool contains_value(const std::vector<double>& xs, double v, double tol = 1e-6) {
    return std::any_of(xs.begin(), xs.end(),
                       [&](double x) { return std::abs(x - v) < tol; });
}

std::vector<double> length_values(double l_d, double s_d, double v, double theta,
                                  BranchGuards g) {
    std::vector<double> out;
    for (const auto& c : candidate_lengths(l_d, s_d, v, theta, g))
        out.push_back(c.value);
    return out;
}

}  // namespace

TEST_CASE("zero slope collapses every branch to l_d * v") {
    for (auto g : {BranchGuards::Signed, BranchGuards::Loose}) {
        const auto vals = length_values(10.0, 0.0, 0.1, kPi / 2, g);
        REQUIRE(!vals.empty());
        for (double v : vals) CHECK(v == doctest::Approx(1.0));
    }
}

TEST_CASE("printed branch enumeration reproduces the hand-derived sets") {
    // With the mirrored signs enumerated, l_d=100, s_d=0.05 gives both the
    // perpendicular value 10 sqrt(0.75) and the boundary value
    // 100 sqrt(0.0025 + 0.01).
    const auto vals = length_values(100.0, 0.05, 0.1, kPi / 2, BranchGuards::Loose);
    CHECK(vals.size() == 2);
    CHECK(contains_value(vals, 8.660, 1e-3));
    CHECK(contains_value(vals, 11.180, 1e-3));

    // Raw offsets before feasibility: +/- arcsin(0.5) shifted by 0 or pi for
    // the perpendicular equation, +/- arctan(0.5) for the boundary one.
    const auto offs = candidate_offsets(0.05, 0.1, kPi / 2, BranchGuards::Loose);
    auto has = [&](double c) {
        return std::any_of(offs.begin(), offs.end(), [&](const OffsetCandidate& o) {
            return std::abs(wrap_pi(o.xi_minus_phi - c)) < 1e-6;
        });
    };
    CHECK(has(-0.5235987755982988));
    CHECK(has(-kPi + 0.5235987755982988));
    CHECK(has(0.4636476090008061));
    CHECK(has(kPi - 0.4636476090008061));
}

TEST_CASE("slope beyond v leaves only the boundary branch") {
    for (auto g : {BranchGuards::Signed, BranchGuards::Loose}) {
        const auto vals = length_values(10.0, 0.2, 0.1, kPi / 2, g);
        REQUIRE(vals.size() == 1);
        CHECK(vals[0] == doctest::Approx(2.2360679).epsilon(1e-6));
    }
}

TEST_CASE("every surviving offset is realizable by some route") {
    // Sweep phi for a fixed edge direction, record |s_d| per detection
    // regime, and confirm each surviving candidate matches some phi.
    Rng rng(551);
    for (int trial = 0; trial < 400; ++trial) {
        const double theta_max = kPi / 2;
        const double v = 0.1;
        const double s_d = rng.uniform(-1.5, 1.5);
        for (const auto& cand : candidate_offsets(s_d, v, theta_max,
                                                  BranchGuards::Signed)) {
            // xi - phi = c: compute the resulting slope directly.
            const double c = cand.xi_minus_phi;
            const double zeta = wrap_pi(c + kPi / 2);
            double theta_star;
            if (std::abs(zeta) <= theta_max)
                theta_star = zeta;
            else
                theta_star = std::clamp(zeta, -theta_max, theta_max);
            const double denom = std::sin(theta_star - c);
            REQUIRE(denom > 0.0);
            const double slope = v * std::sin(c) / denom;
            CHECK(slope == doctest::Approx(s_d).epsilon(1e-9));
        }
        // The loose enumeration keeps the mirrored-sign siblings: they
        // must reproduce at least the magnitude of the slope.
        for (const auto& cand : candidate_offsets(s_d, v, theta_max,
                                                  BranchGuards::Loose)) {
            const double c = cand.xi_minus_phi;
            const double zeta = wrap_pi(c + kPi / 2);
            const double theta_star = std::clamp(zeta, -theta_max, theta_max);
            const double denom = std::sin(theta_star - c);
            if (std::abs(denom) < 1e-12) continue;
            const double slope = v * std::sin(c) / denom;
            CHECK(std::abs(std::abs(slope) - std::abs(s_d)) < 1e-9);
        }
    }
}

TEST_CASE("straight-line pair of equal zero slopes has no vertex candidate") {
    CHECK(candidate_angles(0.0, 0.0, 0.1, kPi / 2).empty());
    CHECK(candidate_angles(0.0, 0.0, 0.1, kPi / 2, BranchGuards::Loose).empty());
}

TEST_CASE("exact vertex crossing includes the true angle") {
    // Noise-free analytic crossing of the right-angle vertex of the
    // default triangle; the candidate set must contain pi/2.
    const auto poly =
        validate_polygon({{-14.43, -8.33}, {28.87, -8.33}, {-14.43, 16.67}});
    const SectorSensor sensor(100.0, kPi / 2);
    const DiskRegion region{{0, 0}, 100.0};
    Rng rng(552);
    int found = 0;
    for (int trial = 0; trial < 500 && found < 40; ++trial) {
        Rng stream(rng.next_u64());
        const auto route = sample_route(region, sensor, stream);
        const auto samples = analytic_trace(route, sensor, poly, 0.1);
        for (const auto& p : samples.vertex_pairs) {
            const double truth = poly.angle_at_vertex(p.vertex);
            const auto gs = candidate_angles(p.s_left, p.s_right, 0.1, kPi / 2);
            CHECK(contains_value(gs, truth, 1e-6));
            ++found;
        }
    }
    CHECK(found >= 40);
}

TEST_CASE("angles below the detectability bound are filtered") {
    // theta_max = pi/4: candidates under pi/4 never survive.
    Rng rng(553);
    for (int i = 0; i < 300; ++i) {
        const double s1 = rng.uniform(-0.2, 0.2);
        const double s2 = rng.uniform(-0.2, 0.2);
        for (double g : candidate_angles(s1, s2, 0.1, kPi / 4))
            CHECK(g >= kPi / 2 - kPi / 4 - 1e-12);
    }
}

TEST_CASE("feasibility filtering breaks mirror pairs") {
    // Candidate sets rarely contain both A and pi - A once infeasible
    // branches are dropped.
    const auto poly =
        validate_polygon({{-14.43, -8.33}, {28.87, -8.33}, {-14.43, 16.67}});
    const SectorSensor sensor(100.0, kPi / 2);
    const DiskRegion region{{0, 0}, 100.0};
    Rng rng(554);
    int pairs = 0, mirrored = 0;
    for (int trial = 0; trial < 4000 && pairs < 1000; ++trial) {
        Rng stream(rng.next_u64());
        const auto route = sample_route(region, sensor, stream);
        for (const auto& p :
             analytic_trace(route, sensor, poly, 0.1).vertex_pairs) {
            const auto gs = candidate_angles(p.s_left, p.s_right, 0.1, kPi / 2,
                                             BranchGuards::Loose);
            ++pairs;
            bool has_mirror = false;
            for (double g : gs)
                if (g < kPi / 2 - 1e-6 && contains_value(gs, kPi - g, 1e-9))
                    has_mirror = true;
            mirrored += has_mirror;
        }
    }
    REQUIRE(pairs >= 500);
    CHECK(static_cast<double>(mirrored) / pairs < 0.5);
}

TEST_SUITE_END();
