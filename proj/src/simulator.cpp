#include "shapesense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace shapesense {

Point2 VehicleRoute::point_at(double s) const {
    const Point2 left_normal{-std::sin(phi), std::cos(phi)};
    const Point2 base = origin + offset * left_normal;
    if (!turn || s <= turn->s_turn) return base + s * unit_vector(phi);
    const Point2 knee = base + turn->s_turn * unit_vector(phi);
    return knee + (s - turn->s_turn) * unit_vector(heading_at(s));
}

double VehicleRoute::heading_at(double s) const {
    if (!turn || s <= turn->s_turn) return phi;
    return phi + turn->sign * kPi / 2.0;
}

VehicleRoute sample_route(const DiskRegion& region, const SectorSensor& sensor,
                          Rng& rng, bool with_turn) {
    VehicleRoute route;
    route.origin = region.center;
    route.phi = rng.uniform(0.0, kTwoPi);
    const double width = region.radius + sensor.r_max * std::sin(sensor.theta_max);
    route.offset = rng.uniform(-width, width);

    // The swath cannot reach the region once the sensor disk is clear of it.
    const double reach = region.radius + sensor.r_max;
    const double half =
        std::sqrt(std::max(0.0, reach * reach - route.offset * route.offset));
    route.s_start = -half;
    route.s_end = half;

    if (with_turn && std::abs(route.offset) < region.radius) {
        const double chord = std::sqrt(region.radius * region.radius -
                                       route.offset * route.offset);
        Turn turn;
        turn.s_turn = rng.uniform(-chord, chord);
        turn.sign = rng.uniform() < 0.5 ? 1 : -1;
        route.turn = turn;
    }
    return route;
}

DistanceTrace simulate_trace(const VehicleRoute& route, const FleetConfig& fleet,
                             const SensingTarget& target, const NoiseConfig& noise,
                             Rng& rng, int sensor_id) {
    DistanceTrace trace;
    trace.sensor_id = sensor_id;
    trace.speed = fleet.speed;
    trace.dt = fleet.dt;

    const double pad = 5.0 * fleet.speed * fleet.dt;
    const double length = (route.s_end - route.s_start) + 2.0 * pad;
    const long steps = static_cast<long>(std::floor(length / (fleet.speed * fleet.dt)));
    trace.samples.reserve(steps + 1);

    for (long i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) * fleet.dt;
        const double s = route.s_start - pad + fleet.speed * t;
        const Point2 pos = route.point_at(s);
        const double heading = route.heading_at(s);
        const auto hit = sector_distance(pos, heading, fleet.sensor, target);

        TraceSample sample;
        sample.t = t;
        if (hit) sample.reading = hit->distance;
        sample.dropped = rng.uniform() < noise.dropout_prob;
        trace.samples.push_back(sample);
    }
    return trace;
}

FleetResult simulate_fleet(const FleetConfig& fleet, const SensingTarget& target,
                           const NoiseConfig& noise) {
    FleetResult result;
    const int n = std::max(0, fleet.n_sensors);
    result.traces.resize(n);
    result.routes.resize(n);
    if (n == 0) return result;

    const auto work = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            Rng rng = sensor_stream(fleet.seed, static_cast<std::uint64_t>(i));
            result.routes[i] =
                sample_route(fleet.region, fleet.sensor, rng, fleet.one_turn_routes);
            result.traces[i] =
                simulate_trace(result.routes[i], fleet, target, noise, rng, i);
        }
    };

    int threads = fleet.threads;
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        threads = std::clamp(threads, 1, 8);
    }
    threads = std::min(threads, n);
    if (threads <= 1) {
        work(0, n);
        return result;
    }
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
    return result;
}

}  // namespace shapesense
