#include "shapesense/detection_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "shapesense/quadrature.hpp"

namespace shapesense {

double measure_whole_edge(double lambda, double r_max, double theta_max) {
    const double s_t = std::sin(theta_max);
    const double c_t = std::cos(theta_max);
    const double reach = r_max * s_t;
    const double arct = std::atan2(r_max, lambda);
    const double eta = reach >= lambda ? kPi / 2.0 : std::asin(reach / lambda);
    const double half_gap = kPi / 2.0 - theta_max;
    const double hyp = std::sqrt(lambda * lambda + r_max * r_max);

    double m = 0.0;
    if (half_gap < arct)
        m += 2.0 * (r_max * (r_max / hyp - c_t) + lambda * (lambda / hyp - s_t));
    if (eta >= std::max(half_gap, theta_max))
        m += 2.0 * ((kPi / 2.0) * reach - lambda * (2.0 - c_t - s_t));
    if (half_gap <= eta && eta < theta_max)
        m += 2.0 * ((half_gap + eta) * reach - lambda * (2.0 - std::cos(eta) - s_t));
    if (theta_max <= eta && eta < half_gap)
        m += 2.0 * ((eta + theta_max) * reach - lambda * (2.0 - c_t - std::cos(eta)));
    if (eta < std::min(half_gap, theta_max))
        m += 4.0 * (eta * reach - lambda * (1.0 - std::cos(eta)));
    return m;
}

namespace {

// Lateral reach of the sensor toward edge k at route direction phi: the
// largest vertex offset at which the detected point on edge k stays in
// range. In the perpendicular regime it is r_max*sin(zeta_k), otherwise
// r_max*sin(theta_max).
double lateral_reach(double xi_k, double phi, double r_max, double theta_max) {
    const double zeta = wrap_pi(xi_k + kPi / 2.0 - phi);
    if (std::abs(zeta) <= theta_max) return r_max * std::sin(zeta);
    return r_max * std::sin(theta_max);
}

// Cutoff guaranteeing that the leading edge contributes slope information
// and not just the vertex arc. Piecewise in u = xi_j - phi (taken in
// [-pi/2, 3pi/2)): infinite while the edge is tracked at theta_max, a
// cosine bound in the perpendicular case, zero behind.
double vertex_info_cutoff(double xi_j, double phi, double r_max,
                          double theta_max) {
    double u = wrap_two_pi(xi_j - phi + kPi / 2.0) - kPi / 2.0;
    if (u >= theta_max - kPi / 2.0 && u < theta_max)
        return std::numeric_limits<double>::infinity();
    if (u >= -kPi / 2.0 && u < theta_max - kPi / 2.0) return r_max * std::cos(u);
    return 0.0;
}

}  // namespace

double measure_vertex_oriented(double xi_j, double gamma, double r_max,
                               double theta_max) {
    const double span = gamma - kPi / 2.0 + theta_max;
    if (span <= 0.0) return 0.0;
    const double xi_next = xi_j + kPi - gamma;
    const double lo = xi_next - theta_max;  // = xi_j + pi - gamma - theta_max
    const double hi = xi_j + kPi / 2.0;

    const auto integrand = [&](double phi) {
        const double w_j = lateral_reach(xi_j, phi, r_max, theta_max);
        const double w_n = lateral_reach(xi_next, phi, r_max, theta_max);
        const double cap = vertex_info_cutoff(xi_j, phi, r_max, theta_max);
        return std::min(std::min(w_j, w_n), cap);
    };

    // Kinks of the window memberships and of the cutoff pieces.
    std::vector<double> cuts = {lo, hi};
    const auto add_cut = [&](double phi) {
        if (phi > lo + 1e-12 && phi < hi - 1e-12) cuts.push_back(phi);
    };
    add_cut(xi_j + kPi / 2.0 - theta_max);   // zeta_j = theta_max, also u = theta_max - pi/2
    add_cut(xi_next + kPi / 2.0 - theta_max);  // zeta_next = theta_max
    std::sort(cuts.begin(), cuts.end());

    // Within a smooth piece the min can still switch between its three
    // arguments; locate crossings by scanning and bisecting.
    std::vector<double> pieces;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        pieces.push_back(cuts[i]);
        const double a = cuts[i], b = cuts[i + 1];
        const auto refine = [&](const std::function<double(double)>& diff) {
            const int kScan = 64;
            double prev = diff(a);
            for (int s = 1; s <= kScan; ++s) {
                const double x = a + (b - a) * s / kScan;
                const double cur = diff(x);
                if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) {
                    double ql = a + (b - a) * (s - 1) / kScan, qr = x;
                    for (int it = 0; it < 60; ++it) {
                        const double m = 0.5 * (ql + qr);
                        if ((diff(ql) < 0.0) != (diff(m) < 0.0))
                            qr = m;
                        else
                            ql = m;
                    }
                    pieces.push_back(0.5 * (ql + qr));
                }
                prev = cur;
            }
        };
        refine([&](double phi) {
            return lateral_reach(xi_j, phi, r_max, theta_max) -
                   lateral_reach(xi_next, phi, r_max, theta_max);
        });
        refine([&](double phi) {
            const double cap = vertex_info_cutoff(xi_j, phi, r_max, theta_max);
            if (!std::isfinite(cap)) return 1.0;
            return cap - std::min(lateral_reach(xi_j, phi, r_max, theta_max),
                                  lateral_reach(xi_next, phi, r_max, theta_max));
        });
    }
    pieces.push_back(hi);
    std::sort(pieces.begin(), pieces.end());

    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
        integral += adaptive_simpson(integrand, pieces[i], pieces[i + 1], 1e-8);
    return 2.0 * integral;
}

double measure_vertex(double gamma, double r_max, double theta_max) {
    if (!(gamma > 0.0 && gamma < kPi))
        throw std::invalid_argument("vertex angle must be in (0, pi)");
    return measure_vertex_oriented(0.0, gamma, r_max, theta_max);
}

double line_measure_normalizer(const DiskRegion& region, const SectorSensor& sensor) {
    return 2.0 * (region.perimeter() +
                  kTwoPi * sensor.r_max * std::sin(sensor.theta_max));
}

double DetectionModel::q_whole(double lambda) const {
    return measure_whole_edge(lambda, sensor.r_max, sensor.theta_max) /
           line_measure_normalizer(region, sensor);
}

double DetectionModel::q_vertex(double gamma) const {
    return measure_vertex(gamma, sensor.r_max, sensor.theta_max) /
           line_measure_normalizer(region, sensor);
}

double DetectionModel::expected_whole_detections(double lambda) const {
    return n_sensors * q_whole(lambda);
}

double DetectionModel::expected_vertex_detections(double gamma) const {
    return n_sensors * q_vertex(gamma);
}

}  // namespace shapesense
