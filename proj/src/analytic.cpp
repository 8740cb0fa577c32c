#include "shapesense/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace shapesense {

namespace {

struct Signature {
    EpisodeKind kind;
    int feature;
    bool operator==(const Signature&) const = default;
};

Signature classify(const std::optional<SectorHit>& hit) {
    if (!hit) return {EpisodeKind::Empty, -1};
    if (hit->inside) return {EpisodeKind::Zero, -1};
    if (hit->vertex >= 0) return {EpisodeKind::VertexArc, hit->vertex};
    return {EpisodeKind::Edge, hit->edge};
}

}  // namespace

AnalyticSamples analytic_trace(const VehicleRoute& route, const SectorSensor& sensor,
                               const ConvexPolygon& target, double speed) {
    if (route.turn)
        throw std::invalid_argument("analytic extraction handles straight routes only");

    const double phi = route.phi;
    const Point2 u = unit_vector(phi);
    const Point2 base = route.point_at(0.0);
    const int n = target.edge_count();

    std::vector<double> events = {route.s_start, route.s_end};
    const auto add_event = [&](double s) {
        if (s > route.s_start && s < route.s_end) events.push_back(s);
    };
    const auto add_linear_root = [&](double value0, double rate) {
        if (std::abs(rate) > 1e-14) add_event(-value0 / rate);
    };

    // Per-edge regime data: zeta_j is constant along a straight route.
    std::vector<double> theta_star(n, 0.0);
    std::vector<double> ray_cos(n, 0.0);   // sin(phi + theta* - xi): > 0 when the ray closes on the line
    std::vector<bool> trackable(n, false);
    for (int j = 0; j < n; ++j) {
        const double xi = target.edge_direction(j);
        const double zeta = wrap_pi(xi + kPi / 2.0 - phi);
        const Point2 nrm = target.outward_normal(j);
        const double h0 = dot(base - target.edge_tail(j), nrm);
        const double dh = dot(u, nrm);
        add_linear_root(h0, dh);  // supporting-line crossing

        if (std::abs(zeta) >= kPi / 2.0 + sensor.theta_max) continue;
        const double th = std::clamp(zeta, -sensor.theta_max, sensor.theta_max);
        const double c = std::sin(phi + th - xi);
        if (c <= 1e-12) continue;
        theta_star[j] = th;
        ray_cos[j] = c;
        trackable[j] = true;

        // Detected point parameter along the edge is linear in s:
        // x(s) = a(s) + (h(s)/c) * dot(e_ray, d).
        const Point2 d = target.edge_unit(j);
        const Point2 e_ray = unit_vector(phi + th);
        const double g = dot(e_ray, d) / c;
        const double a0 = dot(base - target.edge_tail(j), d);
        const double da = dot(u, d);
        const double x0 = a0 + h0 * g;
        const double dx = da + dh * g;
        add_linear_root(x0, dx);                           // sweep passes the tail
        add_linear_root(x0 - target.edge_length(j), dx);   // sweep passes the head
        add_linear_root(h0 - sensor.r_max * c, dh);        // r crosses r_max
    }

    for (int k = 0; k < n; ++k) {
        const Point2 v = target.vertex(k);
        // |p(s) - v| = r_max
        const Point2 w = base - v;
        const double b = dot(w, u);
        const double c0 = dot(w, w) - sensor.r_max * sensor.r_max;
        const double disc = b * b - c0;
        if (disc >= 0.0) {
            add_event(-b - std::sqrt(disc));
            add_event(-b + std::sqrt(disc));
        }
        // Vertex on a sector boundary ray, and vertex directly astern.
        for (const double rel : {sensor.theta_max, -sensor.theta_max, kPi}) {
            const Point2 e = unit_vector(phi + rel);
            // cross(v - p(s), e) = 0 with dot(v - p(s), e) >= 0
            const double cr0 = cross(v - base, e);
            const double crr = -cross(u, e);
            if (std::abs(crr) > 1e-14) {
                const double s = -cr0 / crr;
                if (dot(v - (base + s * u), e) >= -1e-9) add_event(s);
            }
        }
    }

    std::sort(events.begin(), events.end());
    std::vector<double> cuts;
    for (double s : events) {
        if (cuts.empty() || s - cuts.back() > 1e-9 * (1.0 + std::abs(s)))
            cuts.push_back(s);
    }

    AnalyticSamples out;
    Episode cur;
    bool have_cur = false;
    const auto flush = [&]() {
        if (have_cur) out.episodes.push_back(cur);
        have_cur = false;
    };

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double s_a = cuts[i];
        const double s_b = cuts[i + 1];
        const double mid = 0.5 * (s_a + s_b);
        const auto hit = sector_distance(route.point_at(mid), phi, sensor, target);
        const Signature sig = classify(hit);
        if (have_cur && sig == Signature{cur.kind, cur.feature}) {
            cur.s_b = s_b;
            continue;
        }
        flush();
        cur = Episode{};
        cur.kind = sig.kind;
        cur.feature = sig.feature;
        cur.s_a = s_a;
        cur.s_b = s_b;
        have_cur = true;
    }
    flush();

    // Fill exact boundary data from the closed forms.
    for (Episode& ep : out.episodes) {
        if (ep.kind == EpisodeKind::Edge) {
            const int j = ep.feature;
            const Point2 nrm = target.outward_normal(j);
            const Point2 d = target.edge_unit(j);
            const Point2 e_ray = unit_vector(phi + theta_star[j]);
            const double c = ray_cos[j];
            const auto r_of = [&](double s) {
                return dot(base + s * u - target.edge_tail(j), nrm) / c;
            };
            const auto sweep_of = [&](double s) {
                const Point2 p = base + s * u;
                return dot(p + r_of(s) * e_ray - target.edge_tail(j), d);
            };
            ep.theta_star = theta_star[j];
            ep.slope = dot(u, nrm) / c;  // dr/ds
            ep.r_a = r_of(ep.s_a);
            ep.r_b = r_of(ep.s_b);
            ep.sweep_a = sweep_of(ep.s_a);
            ep.sweep_b = sweep_of(ep.s_b);
        } else if (ep.kind == EpisodeKind::VertexArc) {
            const Point2 v = target.vertex(ep.feature);
            ep.r_a = norm(v - (base + ep.s_a * u));
            ep.r_b = norm(v - (base + ep.s_b * u));
        }
    }

    // Whole-edge detections: the swept parameter covers the full edge.
    std::vector<int> whole_index(out.episodes.size(), -1);
    for (std::size_t i = 0; i < out.episodes.size(); ++i) {
        const Episode& ep = out.episodes[i];
        if (ep.kind != EpisodeKind::Edge || !trackable[ep.feature]) continue;
        const double lam = target.edge_length(ep.feature);
        const double tol = 1e-6 * std::max(1.0, lam);
        const double lo = std::min(ep.sweep_a, ep.sweep_b);
        const double hi = std::max(ep.sweep_a, ep.sweep_b);
        if (lo <= tol && hi >= lam - tol) {
            whole_index[i] = static_cast<int>(out.whole_edges.size());
            out.whole_edges.push_back({ep.feature, (ep.s_b - ep.s_a) / speed,
                                       speed * ep.slope});
        }
    }

    // Vertex pairs: consecutive edge episodes of adjacent edges, optionally
    // separated by the arc of the shared vertex. Zero or empty stretches
    // between them disqualify the pair.
    const auto shared_vertex = [&](int e1, int e2) -> int {
        if ((e1 + 1) % n == e2) return (e1 + 1) % n;
        if ((e2 + 1) % n == e1) return e1;
        return -1;
    };
    for (std::size_t i = 0; i + 1 < out.episodes.size(); ++i) {
        const Episode& a = out.episodes[i];
        if (a.kind != EpisodeKind::Edge) continue;
        std::size_t j = i + 1;
        int via_vertex = -1;
        if (out.episodes[j].kind == EpisodeKind::VertexArc) {
            via_vertex = out.episodes[j].feature;
            ++j;
            if (j >= out.episodes.size()) break;
        }
        const Episode& b = out.episodes[j];
        if (b.kind != EpisodeKind::Edge) continue;
        const int v = shared_vertex(a.feature, b.feature);
        if (v < 0 || (via_vertex >= 0 && via_vertex != v)) continue;
        out.vertex_pairs.push_back({v, speed * a.slope, speed * b.slope});

        const auto attach = [&](std::size_t ep_idx, bool is_left) {
            const int w = whole_index[ep_idx];
            if (w < 0) return;
            const auto& whole = out.whole_edges[w];
            const Episode& other = is_left ? b : a;
            out.edge_vertex.push_back({whole.edge, v, whole.l_d, whole.s_d,
                                       speed * other.slope, is_left});
        };
        attach(i, true);
        attach(j, false);
    }

    return out;
}

}  // namespace shapesense
