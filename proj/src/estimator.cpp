#include <algorithm>
#include <cmath>
#include <set>

#include "shapesense/estimator.hpp"

namespace shapesense {

namespace {

// A candidate pairs with an adopted estimate only when it falls inside the
// cluster's bin span (with half a bin of slack); candidates off every
// adopted cluster carry no pairing information.
int matching_cluster(double value, const std::vector<ClusterEstimate>& clusters,
                     double extra_slack = 0.0) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const double slack = 0.5 * clusters[i].bin_width + extra_slack;
        if (value < clusters[i].lo - slack || value > clusters[i].hi + slack) continue;
        const double d = std::abs(value - clusters[i].center);
        if (best < 0 || d < best_d) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

double length_for_family(double l_d, double s_d, double v, double theta_max,
                         BranchFamily fam) {
    switch (fam) {
        case BranchFamily::Perp: {
            const double ratio = s_d / v;
            return l_d * v * std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
        }
        case BranchFamily::ClampPlus:
            return l_d * std::hypot(s_d * std::sin(theta_max),
                                    s_d * std::cos(theta_max) + v);
        case BranchFamily::ClampMinus:
            return l_d * std::hypot(s_d * std::sin(theta_max),
                                    s_d * std::cos(theta_max) - v);
    }
    return 0.0;
}

}  // namespace

PairMatrix pair_ratio_matrix(const std::vector<EdgeVertexSample>& samples,
                             const std::vector<ClusterEstimate>& length_clusters,
                             const std::vector<ClusterEstimate>& angle_clusters,
                             const DetectionModel& model, double v, double theta_max,
                             double dt, BranchGuards guards) {
    PairMatrix pm;
    for (const auto& c : length_clusters) pm.lengths.push_back(c.center);
    for (const auto& c : angle_clusters) pm.angles.push_back(c.center);
    const std::size_t rows = pm.lengths.size();
    const std::size_t cols = pm.angles.size();
    pm.raw.assign(rows, std::vector<double>(cols, 0.0));
    pm.expected.assign(rows, std::vector<double>(cols, 0.0));
    pm.ratio.assign(rows, std::vector<double>(cols, 0.0));
    if (rows == 0 || cols == 0) return pm;

    const double angle_floor = kPi / 2.0 - theta_max;
    for (const auto& ev : samples) {
        const auto shared = candidate_offsets(ev.s_whole, v, theta_max, guards);
        const auto other = candidate_offsets(ev.s_other, v, theta_max, guards);
        std::set<std::pair<int, int>> cells;
        for (const auto& osh : shared) {
            const double lam =
                length_for_family(ev.l_d, ev.s_whole, v, theta_max, osh.family);
            const double slack = ev.l_d > 0.0 ? 2.0 * dt * lam / ev.l_d : 0.0;
            const int row = matching_cluster(lam, length_clusters, slack);
            for (const auto& oot : other) {
                const double gamma =
                    kPi - std::abs(wrap_pi(oot.xi_minus_phi - osh.xi_minus_phi));
                if (gamma <= 1e-12 || gamma >= kPi - 1e-12 || gamma < angle_floor)
                    continue;
                const int col = matching_cluster(gamma, angle_clusters);
                if (row >= 0 && col >= 0) cells.insert({row, col});
            }
        }
        if (cells.empty()) continue;
        const double w = 1.0 / static_cast<double>(cells.size());
        for (const auto& [row, col] : cells) pm.raw[row][col] += w;
    }

    // Independence baseline: proportional to E[N_d(a)] E[N_d(b)],
    // normalized to the observed total.
    double total = 0.0;
    for (const auto& row : pm.raw)
        for (double x : row) total += x;

    std::vector<double> en_len(rows, 0.0), en_ang(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        if (!length_clusters[i].undetectable)
            en_len[i] = length_clusters[i].multiplicity *
                        model.expected_whole_detections(length_clusters[i].center);
    for (std::size_t j = 0; j < cols; ++j)
        if (!angle_clusters[j].undetectable)
            en_ang[j] = angle_clusters[j].multiplicity *
                        model.expected_vertex_detections(angle_clusters[j].center);

    double denom = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) denom += en_len[i] * en_ang[j];
    if (denom <= 0.0) return pm;

    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            pm.expected[i][j] = en_len[i] * en_ang[j] * total / denom;
            pm.ratio[i][j] = pm.expected[i][j] > 0.0 ? pm.raw[i][j] / pm.expected[i][j] : 0.0;
        }
    }
    return pm;
}

namespace {

struct AssemblySearch {
    const PairMatrix& pairs;
    const AssemblyParams& params;
    std::vector<double> row_cut;             // per-edge connection cutoffs
    std::vector<std::vector<int>> row_top2;  // strongest columns per edge
    int n = 0;
    std::vector<int> edge_pool;    // remaining multiplicity per length cluster
    std::vector<int> vertex_pool;  // remaining multiplicity per angle cluster
    std::vector<int> edge_seq;
    std::vector<int> vertex_seq;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> complete;
    long nodes = 0;
    bool truncated = false;

    bool connects(int edge, int vertex) const {
        if (pairs.ratio[edge][vertex] >= row_cut[edge]) return true;
        for (int c : row_top2[edge])
            if (c == vertex) return true;
        return false;
    }

    void run() {
        // Fix the first edge to the first cluster with remaining stock to
        // cut cyclic symmetry.
        for (std::size_t c = 0; c < edge_pool.size(); ++c) {
            if (edge_pool[c] > 0) {
                edge_pool[c] -= 1;
                edge_seq.push_back(static_cast<int>(c));
                extend_vertex();
                return;
            }
        }
    }

    void extend_vertex() {
        if (++nodes > params.max_nodes) {
            truncated = true;
            return;
        }
        const int pos = static_cast<int>(vertex_seq.size());
        const int prev_edge = edge_seq[pos];
        const bool closing = pos == n - 1;
        for (std::size_t c = 0; c < vertex_pool.size(); ++c) {
            if (vertex_pool[c] == 0 || !connects(prev_edge, static_cast<int>(c)))
                continue;
            if (closing && !connects(edge_seq[0], static_cast<int>(c))) continue;
            vertex_pool[c] -= 1;
            vertex_seq.push_back(static_cast<int>(c));
            if (closing)
                complete.emplace_back(edge_seq, vertex_seq);
            else
                extend_edge();
            vertex_seq.pop_back();
            vertex_pool[c] += 1;
            if (truncated) return;
        }
    }

    void extend_edge() {
        if (++nodes > params.max_nodes) {
            truncated = true;
            return;
        }
        const int vertex = vertex_seq.back();
        for (std::size_t c = 0; c < edge_pool.size(); ++c) {
            if (edge_pool[c] == 0 || !connects(static_cast<int>(c), vertex)) continue;
            edge_pool[c] -= 1;
            edge_seq.push_back(static_cast<int>(c));
            extend_vertex();
            edge_seq.pop_back();
            edge_pool[c] += 1;
            if (truncated) return;
        }
    }
};

double closure_residual(const std::vector<double>& lengths,
                        const std::vector<double>& angles) {
    Point2 pos{0.0, 0.0};
    double heading = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        pos = pos + lengths[i] * unit_vector(heading);
        heading += kPi - angles[i];
    }
    return norm(pos);
}

// Canonical form of the interleaved cyclic sequence up to rotation and
// reflection; mirror arrangements are the same hypothesis.
std::vector<int> canonical_cycle(const std::vector<int>& edges,
                                 const std::vector<int>& vertices) {
    const int n = static_cast<int>(edges.size());
    std::vector<int> inter(2 * n);
    for (int i = 0; i < n; ++i) {
        inter[2 * i] = edges[i];
        inter[2 * i + 1] = vertices[i];
    }
    std::vector<int> best;
    for (int flip = 0; flip < 2; ++flip) {
        std::vector<int> seq = inter;
        if (flip) {
            // Reverse, keeping the edge/vertex alternation: edge i pairs
            // with the vertex before it.
            std::vector<int> rev(2 * n);
            for (int i = 0; i < n; ++i) {
                rev[2 * i] = inter[2 * ((n - i) % n)];
                rev[2 * i + 1] = inter[(2 * (n - i) - 1 + 2 * n) % (2 * n)];
            }
            seq = rev;
        }
        for (int r = 0; r < n; ++r) {
            std::vector<int> rot(2 * n);
            for (int i = 0; i < 2 * n; ++i) rot[i] = seq[(i + 2 * r) % (2 * n)];
            if (best.empty() || rot < best) best = rot;
        }
    }
    return best;
}

}  // namespace

namespace {

// Feasibility of a multiplicity assignment: matching totals, enough
// vertices for a polygon, angle sum near (n-2)*pi.
bool multiplicities_feasible(const std::vector<int>& edge_mult,
                             const std::vector<int>& vertex_mult,
                             const std::vector<ClusterEstimate>& angle_clusters,
                             double angle_sum_tol, std::string* why = nullptr) {
    int n_edges = 0, n_vertices = 0;
    for (int m : edge_mult) n_edges += m;
    for (int m : vertex_mult) n_vertices += m;
    if (n_vertices < 3) {
        if (why) *why = "fewer than 3 vertices after rounding multiplicities";
        return false;
    }
    if (n_edges != n_vertices) {
        if (why)
            *why = "edge count " + std::to_string(n_edges) +
                   " does not match vertex count " + std::to_string(n_vertices);
        return false;
    }
    double angle_sum = 0.0;
    for (std::size_t c = 0; c < angle_clusters.size(); ++c)
        angle_sum += vertex_mult[c] * angle_clusters[c].center;
    const double expected_sum = (n_vertices - 2) * kPi;
    if (std::abs(angle_sum - expected_sum) > angle_sum_tol * expected_sum) {
        if (why)
            *why = "angle sum " + std::to_string(angle_sum) +
                   " inconsistent with (n-2)*pi = " + std::to_string(expected_sum);
        return false;
    }
    return true;
}

}  // namespace

ShapeHypothesis assemble_shape(const std::vector<ClusterEstimate>& length_clusters,
                               const std::vector<ClusterEstimate>& angle_clusters,
                               const PairMatrix& pairs, const AssemblyParams& params) {
    std::vector<int> edge_mult, vertex_mult;
    for (const auto& c : length_clusters)
        edge_mult.push_back(
            c.undetectable ? 0
                           : std::max(0, static_cast<int>(std::lround(c.multiplicity))));
    for (const auto& c : angle_clusters)
        vertex_mult.push_back(
            c.undetectable ? 0
                           : std::max(0, static_cast<int>(std::lround(c.multiplicity))));

    // Prefer the plainly rounded multiplicities; when those are infeasible,
    // look for the nearest floor/ceil assignment that closes the counts.
    std::string why;
    bool adjusted = false;
    if (!multiplicities_feasible(edge_mult, vertex_mult, angle_clusters,
                                 params.angle_sum_tol, &why)) {
        const auto options = [](const std::vector<ClusterEstimate>& clusters) {
            std::vector<std::pair<int, int>> opts;
            for (const auto& c : clusters) {
                if (c.undetectable || c.multiplicity <= 0.0) {
                    opts.push_back({0, 0});
                } else {
                    const int lo = static_cast<int>(std::floor(c.multiplicity));
                    opts.push_back({lo, lo + 1});
                }
            }
            return opts;
        };
        const auto edge_opts = options(length_clusters);
        const auto vertex_opts = options(angle_clusters);
        double best_dev = std::numeric_limits<double>::infinity();
        std::vector<int> best_e, best_v;
        const int ne = static_cast<int>(edge_opts.size());
        const int nv = static_cast<int>(vertex_opts.size());
        for (int mask_e = 0; mask_e < (1 << ne); ++mask_e) {
            std::vector<int> em(ne);
            double dev_e = 0.0;
            for (int i = 0; i < ne; ++i) {
                em[i] = (mask_e >> i) & 1 ? edge_opts[i].second : edge_opts[i].first;
                dev_e += std::abs(em[i] - length_clusters[i].multiplicity);
            }
            for (int mask_v = 0; mask_v < (1 << nv); ++mask_v) {
                std::vector<int> vm(nv);
                double dev = dev_e;
                for (int i = 0; i < nv; ++i) {
                    vm[i] = (mask_v >> i) & 1 ? vertex_opts[i].second : vertex_opts[i].first;
                    dev += std::abs(vm[i] - angle_clusters[i].multiplicity);
                }
                if (dev >= best_dev) continue;
                if (!multiplicities_feasible(em, vm, angle_clusters, params.angle_sum_tol))
                    continue;
                best_dev = dev;
                best_e = em;
                best_v = vm;
            }
        }
        if (best_e.empty()) throw NoConsistentShape(why);
        edge_mult = best_e;
        vertex_mult = best_v;
        adjusted = true;
    }
    int n_edges = 0;
    for (int m : edge_mult) n_edges += m;

    AssemblySearch search{pairs, params};
    search.row_cut.resize(pairs.lengths.size(), params.connection_threshold);
    search.row_top2.resize(pairs.lengths.size());
    for (std::size_t i = 0; i < pairs.lengths.size(); ++i) {
        double row_max = 0.0;
        for (double x : pairs.ratio[i]) row_max = std::max(row_max, x);
        search.row_cut[i] =
            std::max(params.connection_threshold, params.connection_rel * row_max);
        std::vector<int> order;
        for (std::size_t j = 0; j < pairs.angles.size(); ++j)
            if (pairs.raw[i][j] >= params.min_top_raw)
                order.push_back(static_cast<int>(j));
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return pairs.ratio[i][a] > pairs.ratio[i][b];
        });
        if (order.size() > 2) order.resize(2);
        search.row_top2[i] = order;
    }
    search.n = n_edges;
    search.edge_pool = edge_mult;
    search.vertex_pool = vertex_mult;
    search.run();
    if (search.complete.empty())
        throw NoConsistentShape(
            "no cyclic arrangement satisfies the connection threshold " +
            std::to_string(params.connection_threshold));

    // Score every arrangement by closure residual; report ambiguity when
    // distinct arrangements tie near the optimum.
    struct Scored {
        double residual;
        std::vector<int> edges, vertices;
        std::vector<int> canon;
    };
    std::vector<Scored> scored;
    double perimeter = 0.0;
    for (std::size_t c = 0; c < length_clusters.size(); ++c)
        perimeter += edge_mult[c] * length_clusters[c].center;
    for (const auto& [edges, vertices] : search.complete) {
        std::vector<double> ls, as;
        for (int e : edges) ls.push_back(length_clusters[e].center);
        for (int v : vertices) as.push_back(angle_clusters[v].center);
        Scored s;
        s.residual = closure_residual(ls, as);
        s.edges = edges;
        s.vertices = vertices;
        s.canon = canonical_cycle(edges, vertices);
        scored.push_back(std::move(s));
    }
    std::sort(scored.begin(), scored.end(),
              [](const Scored& a, const Scored& b) { return a.residual < b.residual; });

    const Scored& best = scored.front();
    ShapeHypothesis hyp;
    for (int e : best.edges) hyp.edge_lengths.push_back(length_clusters[e].center);
    for (int v : best.vertices) hyp.vertex_angles.push_back(angle_clusters[v].center);
    hyp.closure_residual = best.residual;
    hyp.perimeter = perimeter;
    for (std::size_t i = 1; i < scored.size(); ++i) {
        if (scored[i].canon == best.canon) continue;
        if (scored[i].residual - best.residual <= params.tie_fraction * perimeter) {
            hyp.ambiguous = true;
            hyp.note = "multiple arrangements tie within tolerance";
            break;
        }
    }
    if (search.truncated) {
        hyp.ambiguous = true;
        hyp.note = "arrangement search truncated at node budget";
    }
    if (adjusted) {
        if (!hyp.note.empty()) hyp.note += "; ";
        hyp.note += "multiplicities adjusted to the nearest consistent assignment";
    }
    return hyp;
}

}  // namespace shapesense
