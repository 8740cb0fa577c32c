#pragma once

#include <utility>
#include <vector>

#include "shapesense/rng.hpp"
#include "shapesense/simulator.hpp"

namespace shapesense {

enum class SegmentKind { Linear, Curve, Zero, Gap };

enum class Event {
    None,
    SlopeChange,
    FromEmpty,
    ToEmpty,
    HitRmax,
    HitZero,
    DropoutBoundary,
    Truncated,
};

struct Segment {
    SegmentKind kind = SegmentKind::Linear;
    // Sample index ranges (inclusive); more than one after gap merging.
    std::vector<std::pair<int, int>> parts;
    double t_s = 0.0;
    double t_e = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    Event start_event = Event::None;
    Event end_event = Event::None;
    int n_reports = 0;
    bool merged = false;
};

struct SegmentationParams {
    double tol_slope = 1e-3;    // residual tolerance per report (length units)
    int min_len = 3;            // minimum reports for a trusted linear segment
    double curve_tol = 1e-7;    // second-difference threshold
    double zero_tol = 1e-9;
    double rmax_margin = 2.0;   // slope multiples distinguishing HitRmax from FromEmpty
    bool merge_gap_segments = true;
    double r_max = 100.0;
};

struct WholeEdgeSample {
    double l_d = 0.0;
    double s_d = 0.0;
    int sensor_id = 0;
    int segment = -1;
};

struct SlopeSample {
    double s_d = 0.0;
    int sensor_id = 0;
    int segment = -1;
};

struct VertexSample {
    double s_left = 0.0;
    double s_right = 0.0;
    int sensor_id = 0;
    int left_segment = -1;
    int right_segment = -1;
};

struct EdgeVertexSample {
    double l_d = 0.0;
    double s_whole = 0.0;
    double s_other = 0.0;
    bool whole_is_left = true;
    int sensor_id = 0;
};

struct AnalysisDiagnostics {
    long discarded_short = 0;
    long merged_gaps = 0;
    long reports = 0;
    long detection_reports = 0;
};

struct SampleSet {
    std::vector<WholeEdgeSample> whole;
    std::vector<SlopeSample> slopes;  // partial edges: slope information only
    std::vector<VertexSample> vertices;
    std::vector<EdgeVertexSample> edge_vertex;
    AnalysisDiagnostics diagnostics;
};

// Piecewise classification of one trace. Greedy linear fits inside each
// detection run, a five-report second-difference test for curved stretches,
// zero runs and dropout gaps as their own segment kinds.
std::vector<Segment> segment_trace(const DistanceTrace& trace,
                                   const SegmentationParams& params);

// s_d becomes tan(arctan(s_d) + eps) with eps ~ N(0, sigma^2), applied to
// the fitted slope of every linear segment.
void apply_slope_noise(std::vector<Segment>& segments, double sigma, Rng& rng);

void extract_samples(const std::vector<Segment>& segments, const DistanceTrace& trace,
                     const SegmentationParams& params, SampleSet& out);

// segment (+ optional slope noise) + extract in one call.
void analyze_trace(const DistanceTrace& trace, const SegmentationParams& params,
                   double sigma_slope, Rng& noise_rng, SampleSet& out);

}  // namespace shapesense
