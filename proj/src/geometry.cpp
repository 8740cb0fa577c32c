#include "shapesense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shapesense {

namespace {
constexpr double kLengthTol = 1e-9;
constexpr double kAngleTol = 1e-12;
}  // namespace

double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

double wrap_pi(double a) {
    double r = wrap_two_pi(a);
    if (r > kPi) r -= kTwoPi;
    return r;
}

ConvexPolygon ConvexPolygon::validate(std::vector<Point2> vertices) {
    const int n = static_cast<int>(vertices.size());
    if (n < 3)
        throw PolygonError(PolygonError::Kind::TooFewVertices,
                           "polygon needs at least 3 vertices");

    double area2 = 0.0;
    for (int i = 0; i < n; ++i)
        area2 += cross(vertices[i], vertices[(i + 1) % n]);
    if (area2 < 0.0)  // clockwise input; orientation is representational
        std::reverse(vertices.begin(), vertices.end());

    ConvexPolygon poly;
    poly.vertices_ = std::move(vertices);
    poly.lengths_.resize(n);
    poly.directions_.resize(n);
    poly.angles_.resize(n);

    for (int j = 0; j < n; ++j) {
        const Point2 d = poly.vertices_[(j + 1) % n] - poly.vertices_[j];
        const double len = norm(d);
        if (len < kLengthTol)
            throw PolygonError(PolygonError::Kind::DegenerateEdge,
                               "edge " + std::to_string(j) + " shorter than 1e-9");
        poly.lengths_[j] = len;
        poly.directions_[j] = wrap_two_pi(std::atan2(d.y, d.x));
    }

    double turn_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const Point2 a = poly.edge_head(j) - poly.edge_tail(j);
        const Point2 b = poly.edge_head(j + 1) - poly.edge_tail(j + 1);
        if (cross(a, b) <= 0.0)
            throw PolygonError(PolygonError::Kind::NonConvex,
                               "vertices are not strictly convex at vertex " +
                                   std::to_string((j + 1) % n));
        // Exterior turn in (0, pi); gamma_j = pi - turn.
        const double turn = wrap_two_pi(poly.directions_[(j + 1) % n] - poly.directions_[j]);
        poly.angles_[j] = kPi - turn;
        turn_sum += turn;
    }
    if (std::abs(turn_sum - kTwoPi) > 1e-6)
        throw PolygonError(PolygonError::Kind::SelfIntersecting,
                           "boundary winds more than once");
    return poly;
}

ConvexPolygon validate_polygon(const std::vector<Point2>& vertices) {
    return ConvexPolygon::validate(vertices);
}

Point2 ConvexPolygon::edge_unit(int j) const {
    const double xi = directions_[index(j)];
    return unit_vector(xi);
}

Point2 ConvexPolygon::outward_normal(int j) const {
    const Point2 d = edge_unit(j);
    return {d.y, -d.x};
}

double ConvexPolygon::edge_plane_distance(int j, Point2 p) const {
    return dot(p - edge_tail(j), outward_normal(j));
}

bool ConvexPolygon::contains(Point2 p, double tol) const {
    for (int j = 0; j < edge_count(); ++j)
        if (edge_plane_distance(j, p) > tol) return false;
    return true;
}

double ConvexPolygon::perimeter() const {
    double s = 0.0;
    for (double len : lengths_) s += len;
    return s;
}

SectorSensor::SectorSensor(double r_max_, double theta_max_)
    : r_max(r_max_), theta_max(theta_max_) {
    if (!(r_max > 0.0))
        throw std::invalid_argument("sensor radius must be positive");
    if (!(theta_max > 0.0 && theta_max <= kPi / 2.0 + kAngleTol))
        throw std::invalid_argument("sensor half-angle must be in (0, pi/2]");
}

double detecting_direction(double zeta, double theta_max) {
    if (!(zeta > -theta_max - kPi / 2.0 && zeta < theta_max + kPi / 2.0))
        throw std::domain_error("zeta outside the detectable band");
    return std::clamp(zeta, -theta_max, theta_max);
}

std::optional<RayEntry> ray_entry(Point2 origin, double angle,
                                  const ConvexPolygon& target) {
    const Point2 e = unit_vector(angle);
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    int enter_edge = -1;
    const int n = target.edge_count();
    for (int j = 0; j < n; ++j) {
        const double h = target.edge_plane_distance(j, origin);
        const double denom = dot(e, target.outward_normal(j));
        if (std::abs(denom) < 1e-15) {
            if (h > kLengthTol) return std::nullopt;  // parallel, outside
            continue;
        }
        const double t = -h / denom;
        if (denom < 0.0) {  // entering the half-plane
            if (t > t_enter) {
                t_enter = t;
                enter_edge = j;
            }
        } else if (t < t_exit) {
            t_exit = t;
        }
    }
    if (t_enter > t_exit + kLengthTol || t_exit < -kLengthTol) return std::nullopt;

    RayEntry entry;
    entry.distance = std::max(t_enter, 0.0);
    entry.point = origin + entry.distance * e;
    entry.edge = enter_edge;
    if (enter_edge >= 0) {
        const double a = dot(entry.point - target.edge_tail(enter_edge),
                             target.edge_unit(enter_edge));
        if (a <= kLengthTol) {
            entry.vertex = enter_edge;
            entry.edge = -1;
        } else if (a >= target.edge_length(enter_edge) - kLengthTol) {
            entry.vertex = (enter_edge + 1) % target.edge_count();
            entry.edge = -1;
        }
    }
    return entry;
}

namespace {

struct NearestFeature {
    double distance;
    Point2 point;
    int edge = -1;
    int vertex = -1;
};

NearestFeature nearest_boundary_point(Point2 p, const ConvexPolygon& target) {
    NearestFeature best;
    best.distance = std::numeric_limits<double>::infinity();
    const int n = target.edge_count();
    for (int j = 0; j < n; ++j) {
        const Point2 tail = target.edge_tail(j);
        const Point2 d = target.edge_unit(j);
        const double len = target.edge_length(j);
        double a = dot(p - tail, d);
        a = std::clamp(a, 0.0, len);
        const Point2 q = tail + a * d;
        const double dist = norm(p - q);
        if (dist < best.distance) {
            best.distance = dist;
            best.point = q;
            if (a <= kLengthTol) {
                best.vertex = j;
                best.edge = -1;
            } else if (a >= len - kLengthTol) {
                best.vertex = (j + 1) % n;
                best.edge = -1;
            } else {
                best.edge = j;
                best.vertex = -1;
            }
        }
    }
    return best;
}

}  // namespace

std::optional<SectorHit> sector_distance(Point2 pos, double heading,
                                         const SectorSensor& sensor,
                                         const ConvexPolygon& target) {
    if (target.contains(pos)) {
        SectorHit hit;
        hit.inside = true;
        hit.point = pos;
        return hit;
    }

    // Unconstrained nearest point first. The in-sector radial distance is
    // quasiconvex in the ray direction (sublevel sets are the directions
    // hitting the convex set T intersected with a disk), so when the nearest
    // direction falls outside the sector the constrained minimum sits on the
    // nearer sector boundary ray.
    const NearestFeature near = nearest_boundary_point(pos, target);
    const double psi = std::atan2(near.point.y - pos.y, near.point.x - pos.x);
    const double theta_near = wrap_pi(psi - heading);

    SectorHit hit;
    if (std::abs(theta_near) <= sensor.theta_max + kAngleTol) {
        hit.distance = near.distance;
        hit.theta = theta_near;
        hit.point = near.point;
        hit.edge = near.edge;
        hit.vertex = near.vertex;
    } else {
        const double theta_b = std::clamp(theta_near, -sensor.theta_max, sensor.theta_max);
        const auto entry = ray_entry(pos, heading + theta_b, target);
        if (!entry) return std::nullopt;
        hit.distance = entry->distance;
        hit.theta = theta_b;
        hit.point = entry->point;
        hit.edge = entry->edge;
        hit.vertex = entry->vertex;
    }
    if (hit.distance > sensor.r_max + kAngleTol) return std::nullopt;
    return hit;
}

RoundedPolygon::RoundedPolygon(ConvexPolygon core, double radius)
    : core_(std::move(core)), radius_(radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("corner radius must be positive");
}

bool RoundedPolygon::contains(Point2 p, double tol) const {
    if (core_.contains(p, tol)) return true;
    return nearest_boundary_point(p, core_).distance <= radius_ + tol;
}

namespace {

// Entry distance of a ray into the disk-sum of the core polygon: the
// nearest intersection with an outward-offset edge or a vertex arc.
std::optional<double> rounded_ray_entry(Point2 origin, double angle,
                                        const ConvexPolygon& core, double rad) {
    const Point2 e = unit_vector(angle);
    double best = std::numeric_limits<double>::infinity();
    const int n = core.edge_count();
    for (int j = 0; j < n; ++j) {
        const Point2 nrm = core.outward_normal(j);
        const Point2 tail = core.edge_tail(j) + rad * nrm;
        const double h = dot(origin - tail, nrm);
        const double denom = dot(e, nrm);
        if (denom < -1e-15 && h > -kLengthTol) {
            const double t = -h / denom;
            if (t >= -kLengthTol && t < best) {
                const Point2 q = origin + t * e;
                const double a = dot(q - tail, core.edge_unit(j));
                if (a >= -kLengthTol && a <= core.edge_length(j) + kLengthTol)
                    best = std::max(t, 0.0);
            }
        }
    }
    for (int k = 0; k < n; ++k) {
        const Point2 v = core.vertex(k);
        const Point2 w = origin - v;
        const double b = dot(w, e);
        const double c = dot(w, w) - rad * rad;
        const double disc = b * b - c;
        if (disc < 0.0) continue;
        const double t = -b - std::sqrt(disc);
        if (t >= -kLengthTol && t < best) {
            // Accept only points on the corner arc: between the outward
            // normals of the two edges meeting at vertex k.
            const Point2 q = origin + std::max(t, 0.0) * e - v;
            const Point2 n_prev = core.outward_normal(k - 1);
            const Point2 n_next = core.outward_normal(k);
            if (cross(n_prev, q) >= -kLengthTol && cross(q, n_next) >= -kLengthTol)
                best = std::max(t, 0.0);
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

}  // namespace

std::optional<SectorHit> sector_distance(Point2 pos, double heading,
                                         const SectorSensor& sensor,
                                         const RoundedPolygon& target) {
    if (target.contains(pos)) {
        SectorHit hit;
        hit.inside = true;
        hit.point = pos;
        return hit;
    }
    const NearestFeature near = nearest_boundary_point(pos, target.core());
    const double psi = std::atan2(near.point.y - pos.y, near.point.x - pos.x);
    const double theta_near = wrap_pi(psi - heading);

    SectorHit hit;
    if (std::abs(theta_near) <= sensor.theta_max + kAngleTol) {
        hit.distance = near.distance - target.radius();
        hit.theta = theta_near;
        hit.point = pos + hit.distance * unit_vector(heading + theta_near);
        hit.edge = near.edge;
        hit.vertex = near.vertex;
    } else {
        const double theta_b = std::clamp(theta_near, -sensor.theta_max, sensor.theta_max);
        const auto entry =
            rounded_ray_entry(pos, heading + theta_b, target.core(), target.radius());
        if (!entry) return std::nullopt;
        hit.distance = *entry;
        hit.theta = theta_b;
        hit.point = pos + hit.distance * unit_vector(heading + theta_b);
    }
    if (hit.distance > sensor.r_max + kAngleTol) return std::nullopt;
    if (hit.distance < 0.0) hit.distance = 0.0;
    return hit;
}

std::optional<SectorHit> sector_distance(Point2 pos, double heading,
                                         const SectorSensor& sensor,
                                         const SensingTarget& target) {
    return std::visit(
        [&](const auto& t) { return sector_distance(pos, heading, sensor, t); },
        target);
}

}  // namespace shapesense
