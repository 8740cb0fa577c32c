#include <doctest.h>

#include <cmath>

#include "shapesense/geometry.hpp"
#include "support/oracles.hpp"

using namespace shapesense;
using namespace shapesense::testing;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("right triangle derives the expected edge data") {
    const auto poly = validate_polygon({{0, 0}, {43.301, 0}, {0, 25}});
    REQUIRE(poly.edge_count() == 3);
    CHECK(poly.edge_length(0) == doctest::Approx(43.301).epsilon(1e-9));
    CHECK(poly.edge_length(1) == doctest::Approx(50.0).epsilon(1e-4));
    CHECK(poly.edge_length(2) == doctest::Approx(25.0).epsilon(1e-9));
    // gamma_j sits at the head of edge j; vertex order gives pi/2, pi/6, pi/3.
    CHECK(poly.angle_at_vertex(0) == doctest::Approx(kPi / 2).epsilon(1e-6));
    CHECK(poly.angle_at_vertex(1) == doctest::Approx(kPi / 6).epsilon(1e-4));
    CHECK(poly.angle_at_vertex(2) == doctest::Approx(kPi / 3).epsilon(1e-4));
}

TEST_CASE("unit square") {
    const auto poly = validate_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    double angle_sum = 0.0;
    for (int j = 0; j < 4; ++j) {
        CHECK(poly.edge_length(j) == doctest::Approx(1.0));
        CHECK(poly.interior_angle(j) == doctest::Approx(kPi / 2));
        angle_sum += poly.interior_angle(j);
    }
    CHECK(angle_sum == doctest::Approx(kTwoPi).epsilon(1e-12));
}

TEST_CASE("degenerate and invalid input is rejected") {
    CHECK_THROWS_AS(validate_polygon({{0, 0}, {1, 0}, {2, 0}}), PolygonError);
    CHECK_THROWS_AS(validate_polygon({{0, 0}, {1, 0}}), PolygonError);
    CHECK_THROWS_AS(validate_polygon({{0, 0}, {1, 0}, {1, 1}, {0.5, 0.2}}), PolygonError);
    CHECK_THROWS_AS(validate_polygon({{0, 0}, {1e-12, 0}, {1, 0}, {0, 1}}), PolygonError);
}

TEST_CASE("clockwise input is re-oriented, not rejected") {
    const auto ccw = validate_polygon({{0, 0}, {4, 0}, {0, 3}});
    const auto cw = validate_polygon({{0, 0}, {0, 3}, {4, 0}});
    for (int j = 0; j < 3; ++j)
        CHECK(cw.interior_angle(j) > 0.0);
    CHECK(cw.perimeter() == doctest::Approx(ccw.perimeter()));
}

TEST_CASE("angle sum identity on random polygons") {
    Rng rng(7001);
    for (int i = 0; i < 200; ++i) {
        const auto poly = random_convex_polygon(rng);
        double sum = 0.0;
        for (int j = 0; j < poly.edge_count(); ++j) sum += poly.interior_angle(j);
        CHECK(std::abs(sum - (poly.edge_count() - 2) * kPi) < 1e-9);
    }
}

TEST_CASE("sector distance basics") {
    const auto square = validate_polygon({{-10, -10}, {10, -10}, {10, 10}, {-10, 10}});
    const SectorSensor sensor(100.0, kPi / 2);

    SUBCASE("inside the target reads zero") {
        const auto hit = sector_distance({0, 0}, 0.3, sensor, square);
        REQUIRE(hit);
        CHECK(hit->inside);
        CHECK(hit->distance == 0.0);
    }
    SUBCASE("front-on edge at distance 5") {
        const auto hit = sector_distance({-15, 0}, 0.0, sensor, square);
        REQUIRE(hit);
        CHECK(hit->distance == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(hit->theta == doctest::Approx(0.0));
    }
    SUBCASE("out of range reports nothing") {
        const SectorSensor short_range(100.0, kPi / 2);
        const auto hit = sector_distance({-160, 0}, 0.0, short_range, square);
        CHECK(!hit);
    }
}

TEST_CASE("sector distance matches the dense angular-sampling oracle") {
    Rng rng(20240611);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto poly = random_convex_polygon(rng);
        const Point2 pos{rng.uniform(-120.0, 120.0), rng.uniform(-120.0, 120.0)};
        const double heading = rng.uniform(0.0, kTwoPi);
        const double theta_max = rng.uniform(0.2, kPi / 2);
        const SectorSensor sensor(rng.uniform(20.0, 150.0), theta_max);

        const auto got = sector_distance(pos, heading, sensor, poly);
        const auto want = sector_distance_scan(pos, heading, sensor, poly);
        if (!want && !got) continue;
        // Range and window boundaries flip discretely; skip knife-edge
        // disagreements and require value agreement elsewhere.
        if (!want || !got) {
            const double g = got ? got->distance : want.value();
            CHECK(std::abs(g - sensor.r_max) < 1e-3 * sensor.r_max);
            continue;
        }
        ++checked;
        CHECK(std::abs(got->distance - *want) < 1e-6);
    }
    CHECK(checked > 1500);
}

TEST_CASE("detecting direction clamps toward the edge perpendicular") {
    CHECK(detecting_direction(0.0, kPi / 4) == doctest::Approx(0.0));
    CHECK(detecting_direction(kPi / 3, kPi / 4) == doctest::Approx(kPi / 4));
    CHECK(detecting_direction(-kPi / 3, kPi / 4) == doctest::Approx(-kPi / 4));
    CHECK(detecting_direction(0.3, kPi / 2) == doctest::Approx(0.3));
    CHECK_THROWS_AS(detecting_direction(kPi / 4 + kPi / 2 + 0.01, kPi / 4),
                    std::domain_error);
    CHECK_THROWS_AS(detecting_direction(-kPi / 4 - kPi / 2 - 0.01, kPi / 4),
                    std::domain_error);
}

TEST_CASE("the analytic detecting direction reproduces the measured ray") {
    Rng rng(555);
    int checked = 0;
    for (int i = 0; i < 8000; ++i) {
        const auto poly = random_convex_polygon(rng);
        const Point2 pos{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
        const double heading = rng.uniform(0.0, kTwoPi);
        const SectorSensor sensor(rng.uniform(30.0, 150.0), rng.uniform(0.2, kPi / 2));
        const auto hit = sector_distance(pos, heading, sensor, poly);
        if (!hit || hit->inside || hit->edge < 0) continue;
        ++checked;
        const double zeta =
            wrap_pi(poly.edge_direction(hit->edge) + kPi / 2 - heading);
        const double theta_star = detecting_direction(zeta, sensor.theta_max);
        CHECK(std::abs(theta_star - hit->theta) < 1e-9);
        const auto entry = ray_entry(pos, heading + theta_star, poly);
        REQUIRE(entry);
        CHECK(std::abs(entry->distance - hit->distance) < 1e-9);
    }
    CHECK(checked > 400);
}

TEST_CASE("readings vary continuously along a straight route away from events") {
    // Halving the step halves the largest jump when no event epoch is
    // crossed (range entry/exit, zero crossing).
    const auto poly = validate_polygon({{-20, -10}, {25, -5}, {10, 20}, {-15, 15}});
    const SectorSensor sensor(80.0, 1.2);
    const Point2 start{-90.0, -60.0};
    const double heading = 0.55;

    const auto max_jump = [&](double step) {
        double worst = 0.0;
        std::optional<double> prev;
        for (int i = 0; i * step <= 180.0; ++i) {
            const Point2 pos = start + (i * step) * unit_vector(heading);
            const auto hit = sector_distance(pos, heading, sensor, poly);
            if (hit && prev && *prev > 1e-6 && hit->distance > 1e-6 &&
                *prev < sensor.r_max - 1.0 && hit->distance < sensor.r_max - 1.0)
                worst = std::max(worst, std::abs(hit->distance - *prev));
            prev = hit ? std::optional<double>(hit->distance) : std::nullopt;
        }
        return worst;
    };
    const double coarse = max_jump(0.2);
    const double fine = max_jump(0.1);
    REQUIRE(coarse > 0.0);
    CHECK(fine < 0.6 * coarse);
}

TEST_CASE("rounded target distance agrees with a dense scan over the 64-gon limit") {
    const auto core = validate_polygon({{-10, -3}, {10, -3}, {10, 3}, {-10, 3}});
    const RoundedPolygon rounded(core, 1.5);
    const SectorSensor sensor(60.0, kPi / 2);

    // Dense polygonal approximation of the rounded boundary.
    std::vector<Point2> approx;
    for (int k = 0; k < core.edge_count(); ++k) {
        const Point2 v = core.vertex(k);
        const Point2 n_prev = core.outward_normal(k - 1);
        const Point2 n_next = core.outward_normal(k);
        const double a0 = std::atan2(n_prev.y, n_prev.x);
        double a1 = std::atan2(n_next.y, n_next.x);
        while (a1 < a0) a1 += kTwoPi;
        for (int s = 0; s <= 40; ++s) {
            const double a = a0 + (a1 - a0) * s / 40.0;
            approx.push_back(v + 1.5 * unit_vector(a));
        }
    }
    const auto fine = validate_polygon(approx);

    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        const Point2 pos{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
        if (rounded.contains(pos, 0.05)) continue;
        const double heading = rng.uniform(0.0, kTwoPi);
        const auto got = sector_distance(pos, heading, sensor, rounded);
        const auto want = sector_distance_scan(pos, heading, sensor, fine);
        if (!got || !want) continue;
        CHECK(std::abs(got->distance - *want) < 5e-3);
    }
}

TEST_SUITE_END();
