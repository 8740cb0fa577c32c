#pragma once

// Test-side oracles, independent of the library's computation paths.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "shapesense/geometry.hpp"
#include "shapesense/rng.hpp"

namespace shapesense::testing {

// Ray-segment intersection by direct 2x2 solve, unlike the library's
// half-plane clipping.
inline std::optional<double> ray_hit_segment(Point2 p, Point2 e, Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double det = cross(e, {-d.x, -d.y});
    if (std::abs(det) < 1e-15) return std::nullopt;
    const Point2 w = a - p;
    const double t = cross(w, {-d.x, -d.y}) / det;
    const double u = cross(e, w) / det;
    if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
    return t;
}

inline std::optional<double> ray_distance(Point2 p, double angle,
                                          const ConvexPolygon& poly) {
    const Point2 e = unit_vector(angle);
    std::optional<double> best;
    for (int j = 0; j < poly.edge_count(); ++j) {
        const auto t = ray_hit_segment(p, e, poly.edge_tail(j), poly.edge_head(j));
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

// Dense angular scan plus golden-section refinement around the best
// sample; the in-window radial distance is quasiconvex, so this resolves
// the minimum far below 1e-6.
inline std::optional<double> sector_distance_scan(Point2 p, double heading,
                                                  const SectorSensor& sensor,
                                                  const ConvexPolygon& poly,
                                                  int coarse = 1024) {
    if (poly.contains(p)) return 0.0;
    const auto f = [&](double theta) {
        const auto d = ray_distance(p, heading + theta, poly);
        return d ? *d : std::numeric_limits<double>::infinity();
    };
    double best_theta = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= coarse; ++i) {
        const double theta = -sensor.theta_max + 2.0 * sensor.theta_max * i / coarse;
        const double v = f(theta);
        if (v < best) {
            best = v;
            best_theta = theta;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    const double step = 2.0 * sensor.theta_max / coarse;
    double lo = std::max(-sensor.theta_max, best_theta - step);
    double hi = std::min(sensor.theta_max, best_theta + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    best = std::min({best, f1, f2});
    if (best > sensor.r_max) return std::nullopt;
    return best;
}

// Random strictly convex polygon with bounded edge lengths and angles,
// centered at its centroid.
inline ConvexPolygon random_convex_polygon(Rng& rng, int min_vertices = 3,
                                           int max_vertices = 8) {
    for (;;) {
        const int want = min_vertices +
                         static_cast<int>(rng.uniform() * (max_vertices - min_vertices + 1));
        std::vector<double> angles;
        for (int i = 0; i < want; ++i) angles.push_back(rng.uniform(0.0, kTwoPi));
        std::sort(angles.begin(), angles.end());
        std::vector<Point2> pts;
        for (double a : angles) {
            const double r = rng.uniform(10.0, 40.0);
            pts.push_back({r * std::cos(a), r * std::sin(a)});
        }
        try {
            ConvexPolygon poly = ConvexPolygon::validate(pts);
            bool ok = true;
            double cx = 0.0, cy = 0.0;
            for (int j = 0; j < poly.edge_count(); ++j) {
                if (poly.edge_length(j) < 2.0) ok = false;
                if (poly.interior_angle(j) < 0.2 || poly.interior_angle(j) > kPi - 0.2)
                    ok = false;
                cx += poly.vertex(j).x;
                cy += poly.vertex(j).y;
            }
            if (!ok) continue;
            cx /= poly.edge_count();
            cy /= poly.edge_count();
            std::vector<Point2> centered;
            for (const auto& v : poly.vertices()) centered.push_back({v.x - cx, v.y - cy});
            return ConvexPolygon::validate(centered);
        } catch (const PolygonError&) {
            continue;
        }
    }
}

// One-sample Kolmogorov-Smirnov p-value against a cdf given as a callable.
template <typename Cdf>
double ks_p_value(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = cdf(samples[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    const double stat = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * stat * stat);
    return std::clamp(p, 0.0, 1.0);
}

// P(Bin(n, q) >= k), iterated from the mode; n is large here so work in logs.
inline double binomial_tail_geq(long n, double q, long k) {
    if (k <= 0) return 1.0;
    if (q <= 0.0) return 0.0;
    double log_term = k * std::log(q) + (n - k) * std::log1p(-q);
    for (long i = 0; i < k; ++i)
        log_term += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(k - i));
    double term = std::exp(log_term);
    double sum = 0.0;
    for (long i = k; i <= n && term > sum * 1e-18; ++i) {
        sum += term;
        term *= (static_cast<double>(n - i) / (i + 1)) * (q / (1.0 - q));
    }
    return std::min(1.0, sum);
}

}  // namespace shapesense::testing
