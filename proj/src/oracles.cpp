#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "shapesense/analytic.hpp"
#include "shapesense/pipeline.hpp"
#include "shapesense/quadrature.hpp"

namespace shapesense {

namespace {

// Closed intervals on the circle, kept as plain [a, b] pairs after
// normalizing the construction so that no operand spans the 2*pi seam
// more than once.
using Interval = std::pair<double, double>;

std::vector<Interval> normalize(double a, double b) {
    // Shift [a, b] (b - a <= 2 pi) into [0, 4 pi) and split at 2 pi.
    while (a < 0.0) {
        a += kTwoPi;
        b += kTwoPi;
    }
    if (b <= kTwoPi) return {{a, b}};
    return {{a, kTwoPi}, {0.0, b - kTwoPi}};
}

std::vector<Interval> intersect(const std::vector<Interval>& xs,
                                const std::vector<Interval>& ys) {
    std::vector<Interval> out;
    for (const auto& x : xs)
        for (const auto& y : ys) {
            const double lo = std::max(x.first, y.first);
            const double hi = std::min(x.second, y.second);
            if (hi > lo + 1e-15) out.push_back({lo, hi});
        }
    return out;
}

double integrate_pieces(const std::vector<Interval>& domain,
                        const std::function<double(double)>& f, double abs_tol) {
    // |sin| and |cos| kinks.
    const double kinks[] = {0.0,        kPi / 2.0, kPi,       3.0 * kPi / 2.0,
                            kTwoPi,     2.5 * kPi, 3.0 * kPi, 3.5 * kPi};
    double total = 0.0;
    for (const auto& piece : domain) {
        std::vector<double> cuts = {piece.first, piece.second};
        for (double k : kinks)
            if (k > piece.first + 1e-14 && k < piece.second - 1e-14) cuts.push_back(k);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            total += adaptive_simpson(f, cuts[i], cuts[i + 1], abs_tol);
    }
    return total;
}

}  // namespace

double measure_whole_edge_quadrature(double lambda, double r_max, double theta_max) {
    // Frame xi = 0. Domains from the integral definition of the measure:
    // the perpendicular-regime window intersected with the strip-positivity
    // range arctan(r/lambda), and the boundary-regime quarters intersected
    // with the eta range.
    const double atn = std::atan2(r_max, lambda);
    const double reach = r_max * std::sin(theta_max);
    const double eta = reach >= lambda ? kPi / 2.0 : std::asin(reach / lambda);
    const double zeta_m = kPi / 2.0 - theta_max;
    const double zeta_p = kPi / 2.0 + theta_max;

    const auto window = normalize(zeta_m, zeta_p);
    const auto strip = [&](double half) {
        auto a = normalize(-half, half);
        auto b = normalize(kPi - half, kPi + half);
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };

    const auto perp_domain = intersect(window, strip(atn));
    auto quarters = normalize(zeta_m - kPi / 2.0, zeta_m);
    {
        auto upper = normalize(zeta_p, zeta_p + kPi / 2.0);
        quarters.insert(quarters.end(), upper.begin(), upper.end());
    }
    const auto clamp_domain = intersect(quarters, strip(eta));

    const double abs_tol = 1e-10 * (r_max + lambda);
    const double perp = integrate_pieces(
        perp_domain,
        [&](double phi) {
            return r_max * std::abs(std::cos(phi)) - lambda * std::abs(std::sin(phi));
        },
        abs_tol);
    const double clamp = integrate_pieces(
        clamp_domain,
        [&](double phi) { return reach - lambda * std::abs(std::sin(phi)); }, abs_tol);
    return perp + clamp;
}

OracleResult oracle_measure1(int trials, std::uint64_t seed) {
    Rng rng(splitmix64(seed));
    double worst = 0.0;
    double worst_lambda = 0.0, worst_r = 0.0, worst_theta = 0.0;
    for (int i = 0; i < trials; ++i) {
        const double lambda = std::exp(rng.uniform(std::log(0.5), std::log(300.0)));
        const double r_max = rng.uniform(1.0, 200.0);
        const double theta_max = rng.uniform(0.05, kPi / 2.0);
        const double closed = measure_whole_edge(lambda, r_max, theta_max);
        const double quad = measure_whole_edge_quadrature(lambda, r_max, theta_max);
        const double rel = std::abs(closed - quad) /
                           std::max(std::abs(quad), 1e-9 * (r_max + lambda));
        if (rel > worst) {
            worst = rel;
            worst_lambda = lambda;
            worst_r = r_max;
            worst_theta = theta_max;
        }
    }
    OracleResult res;
    res.pass = worst < 1e-6;
    std::ostringstream os;
    os << "measure1: max relative error " << worst << " over " << trials
       << " parameter sets (worst at lambda=" << worst_lambda << ", r_max=" << worst_r
       << ", theta_max=" << worst_theta << ")";
    res.summary = os.str();
    return res;
}

OracleResult oracle_measure2(double gamma, double r_max, double theta_max,
                             long lines, std::uint64_t seed) {
    const DiskRegion region{{0.0, 0.0}, 100.0};
    const SectorSensor sensor(r_max, theta_max);
    const double speed = 0.1;

    // Isoceles wedge with the probed angle at vertex 0, legs long enough
    // that detections around the vertex never run off the edge ends.
    const double legs = 0.85 * region.radius;
    const double half = gamma / 2.0;
    const ConvexPolygon wedge = validate_polygon(
        {{0.0, 0.0},
         {legs * std::cos(half), -legs * std::sin(half)},
         {legs * std::cos(half), legs * std::sin(half)}});

    long detected = 0;
    Rng rng(splitmix64(seed));
    for (long i = 0; i < lines; ++i) {
        Rng line_rng(rng.next_u64());
        const VehicleRoute route = sample_route(region, sensor, line_rng);
        const AnalyticSamples samples = analytic_trace(route, sensor, wedge, speed);
        for (const auto& p : samples.vertex_pairs)
            if (p.vertex == 0) {
                ++detected;
                break;
            }
    }
    const double p_hat = static_cast<double>(detected) / lines;
    const double p_model =
        measure_vertex(gamma, r_max, theta_max) / line_measure_normalizer(region, sensor);
    const double sigma = std::sqrt(std::max(p_model * (1.0 - p_model), 1e-12) / lines);

    OracleResult res;
    res.pass = std::abs(p_hat - p_model) <= 3.0 * sigma;
    std::ostringstream os;
    os << "measure2: MC fraction " << p_hat << " vs model " << p_model << " ("
       << std::abs(p_hat - p_model) / sigma << " sigma, n=" << lines
       << ", gamma=" << gamma << ")";
    res.summary = os.str();
    return res;
}

OracleResult oracle_qd_mc(double lambda, long lines, std::uint64_t seed) {
    const DiskRegion region{{0.0, 0.0}, 100.0};
    const SectorSensor sensor(100.0, kPi / 2.0);
    const double speed = 0.1;

    // A sliver rectangle stands in for an isolated edge; the measure is
    // per directed polygon edge, so only the bottom side counts.
    const double w = 5e-5;
    const ConvexPolygon sliver = validate_polygon({{-lambda / 2.0, -w},
                                                   {lambda / 2.0, -w},
                                                   {lambda / 2.0, w},
                                                   {-lambda / 2.0, w}});

    long detected = 0;
    Rng rng(splitmix64(seed));
    for (long i = 0; i < lines; ++i) {
        Rng line_rng(rng.next_u64());
        const VehicleRoute route = sample_route(region, sensor, line_rng);
        const AnalyticSamples samples = analytic_trace(route, sensor, sliver, speed);
        for (const auto& whole : samples.whole_edges)
            if (whole.edge == 0) {
                ++detected;
                break;
            }
    }
    const double p_hat = static_cast<double>(detected) / lines;
    const DetectionModel model{region, sensor, 1};
    const double p_model = model.q_whole(lambda);
    const double sigma = std::sqrt(std::max(p_model * (1.0 - p_model), 1e-12) / lines);

    OracleResult res;
    res.pass = std::abs(p_hat - p_model) <= 3.0 * sigma;
    std::ostringstream os;
    os << "qd-mc: MC fraction " << p_hat << " vs q_d " << p_model << " ("
       << std::abs(p_hat - p_model) / sigma << " sigma, n=" << lines
       << ", lambda=" << lambda << ")";
    res.summary = os.str();
    return res;
}

OracleResult oracle_route_uniformity(long n, std::uint64_t seed) {
    const DiskRegion region{{0.0, 0.0}, 100.0};
    const SectorSensor sensor(100.0, kPi / 2.0);
    std::vector<double> phis;
    phis.reserve(n);
    Rng rng(splitmix64(seed));
    for (long i = 0; i < n; ++i) {
        Rng line_rng(rng.next_u64());
        phis.push_back(sample_route(region, sensor, line_rng).phi);
    }
    std::sort(phis.begin(), phis.end());
    double d = 0.0;
    for (long i = 0; i < n; ++i) {
        const double cdf = phis[i] / kTwoPi;
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    // Kolmogorov asymptotic p-value.
    const double stat = d * (std::sqrt(static_cast<double>(n)) + 0.12 +
                             0.11 / std::sqrt(static_cast<double>(n)));
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * stat * stat);
    p = std::clamp(p, 0.0, 1.0);

    OracleResult res;
    res.pass = p > 0.01;
    std::ostringstream os;
    os << "route-uniformity: KS D=" << d << ", p=" << p << " over " << n << " routes";
    res.summary = os.str();
    return res;
}

}  // namespace shapesense
