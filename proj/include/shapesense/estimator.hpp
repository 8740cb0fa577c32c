#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapesense/detection_model.hpp"
#include "shapesense/trace_analysis.hpp"

namespace shapesense {

// Which inversion produced a candidate: the perpendicular-detection
// formula, or the sector-boundary formula with either sign of the speed
// term. The exact candidate always comes from the branch matching the true
// detection regime; the others scatter with the hidden route direction.
enum class BranchFamily { Perp, ClampPlus, ClampMinus };

struct OffsetCandidate {
    double xi_minus_phi = 0.0;  // normalized to (-pi, pi]
    BranchFamily family = BranchFamily::Perp;
};

struct LengthCandidate {
    double value = 0.0;
    BranchFamily family = BranchFamily::Perp;
};

// How strictly the inversion formulas respect the sign of the observed
// slope. Signed keeps the geometrically realizable branches only: a
// perpendicular-regime reading always closes on the edge (slope <= 0 in
// that regime's frame), and the boundary ray must point toward the edge
// line. Loose enumerates the mirrored signs as the formulas are printed;
// it produces the same exact candidates plus phantom siblings that blur
// the multiplicity calibration.
enum class BranchGuards { Signed, Loose };

// All feasible inversions of one observed slope into xi - phi.
std::vector<OffsetCandidate> candidate_offsets(double s_d, double v, double theta_max,
                                               BranchGuards guards = BranchGuards::Signed);

// Edge-length candidates from one whole-edge observation. May be empty
// under slope noise.
std::vector<LengthCandidate> candidate_lengths(double l_d, double s_d, double v,
                                               double theta_max,
                                               BranchGuards guards = BranchGuards::Signed);

// Vertex-angle candidates from the two slopes around a vertex. The sweep
// orientation along the boundary is unobservable, so gamma and 2*pi - gamma
// are folded onto (0, pi). Candidates below the detectability bound
// pi/2 - theta_max are dropped.
std::vector<double> candidate_angles(double s_left, double s_right, double v,
                                     double theta_max,
                                     BranchGuards guards = BranchGuards::Signed);

struct ClusterParams {
    double k_sub = 7.0;            // mean candidates per sub-interval
    double threshold_scale = 2.0;  // adoption threshold in multiples of the mean occupancy
    int min_cluster_count = 6;
    double bin_divisor = 1.0;      // > 1 widens bins to merge noisy candidates
};

struct Cluster {
    double center = 0.0;  // mean of member candidates
    long count = 0;
    double lo = 0.0;
    double hi = 0.0;
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    int n_sub = 0;
    long total = 0;
    double threshold = 0.0;
    std::vector<long> counts;
    std::vector<Cluster> adopted;
};

// Sub-interval voting: equal-width bins between the extreme candidates,
// bins above the adoption threshold become clusters, adjacent qualifying
// bins merge into one cluster.
Histogram cluster_candidates(const std::vector<double>& values, const ClusterParams& params);

struct ClusterEstimate {
    double center = 0.0;
    long count = 0;
    double multiplicity = 0.0;  // estimated number of edges/vertexes sharing the value
    bool undetectable = false;
    double lo = 0.0;  // adopted bin span
    double hi = 0.0;
    double bin_width = 0.0;
};

// Multiplicity calibration: N(x) = n_x c(x) / (E[n_d(x)] * sum c). Clusters
// whose expected detection count is below min_expected cannot be calibrated
// (the vanishing case is the undetectable-vertex bound) and are flagged.
std::vector<ClusterEstimate> estimate_counts(
    long n_samples, const Histogram& clusters,
    const std::function<double(double)>& expected_detections,
    double min_expected = 0.0);

struct PairMatrix {
    std::vector<double> lengths;  // row cluster centers
    std::vector<double> angles;   // column cluster centers
    std::vector<std::vector<double>> raw;       // observed joint counts
    std::vector<std::vector<double>> expected;  // independence baseline
    std::vector<std::vector<double>> ratio;
};

// Joint edge-length / vertex-angle counts against the independence
// baseline. A sample maps to every adopted cell reachable through one
// consistent branch pair (the shared slope's offset branch fixes the
// length formula); multiple cells share the sample's weight equally.
// dt widens the length-matching slack: a duration measured between sample
// instants can be short by about two steps, which scales with the sweep
// rate lambda/l_d.
PairMatrix pair_ratio_matrix(const std::vector<EdgeVertexSample>& samples,
                             const std::vector<ClusterEstimate>& length_clusters,
                             const std::vector<ClusterEstimate>& angle_clusters,
                             const DetectionModel& model, double v, double theta_max,
                             double dt = 0.0,
                             BranchGuards guards = BranchGuards::Signed);

struct AssemblyParams {
    // An edge may touch a vertex when its normalized ratio clears both an
    // absolute floor and a fraction of the row maximum. The relative term
    // copes with rare vertices, whose independence baseline overstates the
    // achievable joint count.
    double connection_threshold = 0.15;
    double connection_rel = 0.3;
    // Each row's two strongest cells stay connectable when they carry at
    // least this much observed joint mass, whatever their ratio; an edge
    // has exactly two incident vertices and rare ones score low ratios.
    double min_top_raw = 1.0;
    double angle_sum_tol = 0.15;
    double tie_fraction = 0.05;  // residual ties within this fraction of perimeter
    long max_nodes = 200000;
};

struct ShapeHypothesis {
    std::vector<double> edge_lengths;   // cyclic order
    std::vector<double> vertex_angles;  // angle i joins edge i and edge i+1
    double closure_residual = 0.0;
    double perimeter = 0.0;
    bool ambiguous = false;
    std::string note;
};

struct NoConsistentShape : std::runtime_error {
    explicit NoConsistentShape(const std::string& msg) : std::runtime_error(msg) {}
};

ShapeHypothesis assemble_shape(const std::vector<ClusterEstimate>& length_clusters,
                               const std::vector<ClusterEstimate>& angle_clusters,
                               const PairMatrix& pairs, const AssemblyParams& params);

}  // namespace shapesense
