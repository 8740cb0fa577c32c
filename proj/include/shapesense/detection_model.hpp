#pragma once

#include "shapesense/geometry.hpp"

namespace shapesense {

// Kinematic measure of directed route lines achieving a whole-edge
// detection of an isolated edge of length `lambda` (closed form).
double measure_whole_edge(double lambda, double r_max, double theta_max);

// Kinematic measure of directed route lines observing both edge slopes
// around a vertex of interior angle `gamma` (numerical integration, exact
// to ~1e-8 absolute). Depends on gamma only; the oriented variant exists
// for the rotation-invariance check.
double measure_vertex(double gamma, double r_max, double theta_max);
double measure_vertex_oriented(double xi_j, double gamma, double r_max,
                               double theta_max);

// Measure of all sampled directed lines: 2 * (|Omega| + 2*pi*r_max*sin(theta_max)).
// The probability denominators live here and nowhere else.
double line_measure_normalizer(const DiskRegion& region, const SectorSensor& sensor);

struct DetectionModel {
    DiskRegion region;
    SectorSensor sensor;
    int n_sensors = 0;

    double q_whole(double lambda) const;
    double q_vertex(double gamma) const;
    double expected_whole_detections(double lambda) const;   // E[n_d(lambda)]
    double expected_vertex_detections(double gamma) const;   // E[n_d(gamma)]
};

}  // namespace shapesense
