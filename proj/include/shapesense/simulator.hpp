#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shapesense/geometry.hpp"
#include "shapesense/rng.hpp"

namespace shapesense {

struct Turn {
    double s_turn = 0.0;  // arc position along the route
    int sign = 1;         // +1 left, -1 right (pi/2 either way)
};

// Hidden route line. phi and offset exist only inside the simulator and
// the oracles; they are never written to the trace channel.
struct VehicleRoute {
    double phi = 0.0;     // direction, uniform in [0, 2*pi)
    double offset = 0.0;  // signed perpendicular displacement from the region center
    double s_start = 0.0;
    double s_end = 0.0;
    Point2 origin{0.0, 0.0};  // region center
    std::optional<Turn> turn;

    Point2 point_at(double s) const;
    double heading_at(double s) const;
};

struct FleetConfig {
    int n_sensors = 1000;
    double speed = 0.1;
    double dt = 1.0;
    SectorSensor sensor{100.0, kPi / 2.0};
    DiskRegion region{{0.0, 0.0}, 100.0};
    std::uint64_t seed = 1;
    bool one_turn_routes = false;
    int threads = 0;  // 0 = hardware default
};

struct NoiseConfig {
    double sigma_slope = 0.0;   // std-dev of the slope-angle error
    double dropout_prob = 0.0;  // per-report loss probability
};

struct TraceSample {
    double t = 0.0;
    std::optional<double> reading;  // nullopt = NO_DETECTION
    bool dropped = false;           // report lost; never reaches the estimator
};

struct DistanceTrace {
    int sensor_id = 0;
    double speed = 0.0;  // known to the estimator
    double dt = 1.0;
    std::vector<TraceSample> samples;
};

// Uniform over the kinematic measure of directed lines whose sensing swath
// can meet the region: phi ~ U[0, 2pi), offset ~ U over
// [-(R + r_max sin theta_max), +(R + r_max sin theta_max)].
VehicleRoute sample_route(const DiskRegion& region, const SectorSensor& sensor,
                          Rng& rng, bool with_turn = false);

DistanceTrace simulate_trace(const VehicleRoute& route, const FleetConfig& fleet,
                             const SensingTarget& target, const NoiseConfig& noise,
                             Rng& rng, int sensor_id = 0);

struct FleetResult {
    std::vector<DistanceTrace> traces;
    std::vector<VehicleRoute> routes;  // ground truth, not exported
};

FleetResult simulate_fleet(const FleetConfig& fleet, const SensingTarget& target,
                           const NoiseConfig& noise);

}  // namespace shapesense
