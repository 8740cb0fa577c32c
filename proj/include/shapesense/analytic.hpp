#pragma once

#include <vector>

#include "shapesense/geometry.hpp"
#include "shapesense/simulator.hpp"

namespace shapesense {

// Exact, continuous-time decomposition of r(t) along a straight route.
// Event abscissas are solved in closed form, so the emitted durations and
// slopes carry no time-discretization error. Used by the validation
// oracles and the exactness tests; the estimation pipeline itself only
// ever sees sampled traces.

enum class EpisodeKind { Edge, VertexArc, Zero, Empty };

struct Episode {
    EpisodeKind kind = EpisodeKind::Empty;
    int feature = -1;     // edge or vertex index
    double s_a = 0.0;     // route abscissa interval
    double s_b = 0.0;
    double r_a = 0.0;     // reading at the boundaries
    double r_b = 0.0;
    double slope = 0.0;   // dr/ds for Edge episodes
    double theta_star = 0.0;
    double sweep_a = 0.0;  // detected-point parameter along the edge
    double sweep_b = 0.0;
};

struct AnalyticWholeEdge {
    int edge = -1;
    double l_d = 0.0;  // duration in time units
    double s_d = 0.0;  // slope in length per time
};

struct AnalyticVertexPair {
    int vertex = -1;
    double s_left = 0.0;
    double s_right = 0.0;
};

struct AnalyticEdgeVertex {
    int edge = -1;
    int vertex = -1;
    double l_d = 0.0;
    double s_whole = 0.0;
    double s_other = 0.0;
    bool whole_is_left = true;
};

struct AnalyticSamples {
    std::vector<Episode> episodes;
    std::vector<AnalyticWholeEdge> whole_edges;
    std::vector<AnalyticVertexPair> vertex_pairs;
    std::vector<AnalyticEdgeVertex> edge_vertex;
};

// Straight routes only; throws std::invalid_argument for turn routes.
AnalyticSamples analytic_trace(const VehicleRoute& route, const SectorSensor& sensor,
                               const ConvexPolygon& target, double speed);

}  // namespace shapesense
