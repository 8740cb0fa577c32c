#include <algorithm>
#include <cmath>

#include "shapesense/estimator.hpp"

namespace shapesense {

namespace {

constexpr double kFeasTol = 1e-12;

bool window_contains(double zeta, double theta_max) {
    return std::abs(zeta) <= theta_max + kFeasTol;
}

void push_unique(std::vector<OffsetCandidate>& out, double value, BranchFamily fam) {
    value = wrap_pi(value);
    for (const auto& c : out)
        if (c.family == fam && std::abs(wrap_pi(c.xi_minus_phi - value)) < 1e-12) return;
    out.push_back({value, fam});
}

}  // namespace

std::vector<OffsetCandidate> candidate_offsets(double s_d, double v, double theta_max,
                                               BranchGuards guards) {
    std::vector<OffsetCandidate> out;

    // Perpendicular detection: v sin(xi - phi) = s_d, feasible when the
    // implied zeta lies inside the sensing window. The loose variant also
    // inverts the mirrored sign, as the formulas are printed.
    if (std::abs(s_d) <= v) {
        const double a = std::asin(s_d / v);
        std::vector<double> raw = {a, kPi - a};
        if (guards == BranchGuards::Loose) {
            raw.push_back(-a);
            raw.push_back(a - kPi);
        }
        for (double c : raw) {
            const double zeta = wrap_pi(c + kPi / 2.0);
            if (window_contains(zeta, theta_max)) push_unique(out, c, BranchFamily::Perp);
        }
    }

    // Boundary-direction detection at theta* = +/- theta_max.
    const double s_sin = s_d * std::sin(theta_max);
    const double s_cos = s_d * std::cos(theta_max);
    if (guards == BranchGuards::Signed) {
        // tan(xi - phi) = sign * s sin(theta) / (v + s cos(theta)); the
        // requirement that the boundary ray closes on the edge line,
        // sin(theta* - c) > 0, picks one of the two tangent roots.
        for (int sign : {+1, -1}) {
            const double c0 = std::atan2(sign * s_sin, v + s_cos);
            for (double c : {c0, c0 + kPi}) {
                if (std::sin(sign * theta_max - c) <= 0.0) continue;
                const double zeta = wrap_pi(c + kPi / 2.0);
                const bool ok = sign > 0 ? zeta > theta_max + kFeasTol
                                         : zeta < -theta_max - kFeasTol;
                if (ok) push_unique(out, c, BranchFamily::ClampPlus);
            }
        }
    } else {
        for (int d : {+1, -1}) {
            const double denom = s_cos + d * v;
            double t;
            if (std::abs(denom) < 1e-300)
                t = std::copysign(kPi / 2.0, s_sin);
            else
                t = std::atan(s_sin / denom);
            const BranchFamily fam =
                d > 0 ? BranchFamily::ClampPlus : BranchFamily::ClampMinus;
            for (int o : {+1, -1}) {
                for (double shift : {0.0, kPi}) {
                    const double c = wrap_pi(o * t + shift);
                    const double zeta = wrap_pi(c + kPi / 2.0);
                    const bool ok = o > 0 ? zeta > theta_max + kFeasTol
                                          : zeta < -theta_max - kFeasTol;
                    if (ok) push_unique(out, c, fam);
                }
            }
        }
    }
    return out;
}

std::vector<LengthCandidate> candidate_lengths(double l_d, double s_d, double v,
                                               double theta_max, BranchGuards guards) {
    const auto offsets = candidate_offsets(s_d, v, theta_max, guards);
    bool perp = false, plus = false, minus = false;
    for (const auto& o : offsets) {
        perp |= o.family == BranchFamily::Perp;
        plus |= o.family == BranchFamily::ClampPlus;
        minus |= o.family == BranchFamily::ClampMinus;
    }

    std::vector<LengthCandidate> out;
    const auto push = [&](double value, BranchFamily fam) {
        for (const auto& c : out)
            if (std::abs(c.value - value) < 1e-9) return;
        out.push_back({value, fam});
    };

    if (perp) {
        const double ratio = s_d / v;
        push(l_d * v * std::sqrt(std::max(0.0, 1.0 - ratio * ratio)), BranchFamily::Perp);
    }
    const double s_sin = s_d * std::sin(theta_max);
    const double s_cos = s_d * std::cos(theta_max);
    if (plus)
        push(l_d * std::hypot(s_sin, s_cos + v), BranchFamily::ClampPlus);
    if (minus)
        push(l_d * std::hypot(s_sin, s_cos - v), BranchFamily::ClampMinus);
    return out;
}

std::vector<double> candidate_angles(double s_left, double s_right, double v,
                                     double theta_max, BranchGuards guards) {
    const auto left = candidate_offsets(s_left, v, theta_max, guards);
    const auto right = candidate_offsets(s_right, v, theta_max, guards);
    const double floor = kPi / 2.0 - theta_max;

    std::vector<double> out;
    for (const auto& a : left) {
        for (const auto& b : right) {
            // gamma = pi - (xi_next - phi) + (xi - phi); the boundary sweep
            // orientation is unknown, so fold gamma and 2 pi - gamma together.
            const double gamma = kPi - std::abs(wrap_pi(b.xi_minus_phi - a.xi_minus_phi));
            if (gamma <= 1e-12 || gamma >= kPi - 1e-12) continue;
            if (gamma < floor) continue;
            bool dup = false;
            for (double g : out)
                if (std::abs(g - gamma) < 1e-9) { dup = true; break; }
            if (!dup) out.push_back(gamma);
        }
    }
    return out;
}

}  // namespace shapesense
