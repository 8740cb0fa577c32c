#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace shapesense {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline Point2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wrap to [0, 2*pi).
double wrap_two_pi(double a);
// Wrap to (-pi, pi].
double wrap_pi(double a);

struct PolygonError : std::invalid_argument {
    enum class Kind { TooFewVertices, DegenerateEdge, NonConvex, SelfIntersecting };
    PolygonError(Kind k, const std::string& msg) : std::invalid_argument(msg), kind(k) {}
    Kind kind;
};

// Strictly convex, simple, closed polygon with counterclockwise vertices.
// Edge j runs from vertex j to vertex j+1 (mod n); the interior angle
// gamma_j sits at the head of edge j.
class ConvexPolygon {
public:
    // Validates and derives per-edge data. Clockwise input is re-oriented.
    static ConvexPolygon validate(std::vector<Point2> vertices);

    int edge_count() const { return static_cast<int>(vertices_.size()); }
    const std::vector<Point2>& vertices() const { return vertices_; }
    Point2 vertex(int i) const { return vertices_[index(i)]; }
    Point2 edge_tail(int j) const { return vertices_[index(j)]; }
    Point2 edge_head(int j) const { return vertices_[index(j + 1)]; }

    double edge_length(int j) const { return lengths_[index(j)]; }     // lambda_j
    double edge_direction(int j) const { return directions_[index(j)]; }  // xi_j
    double interior_angle(int j) const { return angles_[index(j)]; }   // gamma_j
    double angle_at_vertex(int k) const { return angles_[index(k - 1)]; }

    Point2 edge_unit(int j) const;
    // Unit normal pointing out of the polygon (right of the edge direction).
    Point2 outward_normal(int j) const;
    // Signed distance of p from edge j's supporting line; positive outside.
    double edge_plane_distance(int j, Point2 p) const;

    bool contains(Point2 p, double tol = 1e-9) const;
    double perimeter() const;

private:
    int index(int i) const {
        const int n = edge_count();
        return ((i % n) + n) % n;
    }

    std::vector<Point2> vertices_;
    std::vector<double> lengths_;
    std::vector<double> directions_;
    std::vector<double> angles_;
};

ConvexPolygon validate_polygon(const std::vector<Point2>& vertices);

struct SectorSensor {
    SectorSensor(double r_max_, double theta_max_);
    double r_max;
    double theta_max;
};

struct DiskRegion {
    Point2 center{0.0, 0.0};
    double radius = 0.0;
    double perimeter() const { return kTwoPi * radius; }
};

struct SectorHit {
    double distance = 0.0;  // 0 when the sensor is in the target
    double theta = 0.0;     // detecting direction relative to heading
    Point2 point{};         // detected boundary point (sensor position when inside)
    int edge = -1;          // edge index when the point is interior to an edge
    int vertex = -1;        // vertex index when the point is a vertex
    bool inside = false;
};

// Minimum distance from the sensor to the target over the sensing sector
// [heading - theta_max, heading + theta_max], capped at r_max.
// nullopt when nothing is within range. The hit's point/theta/feature are
// instrumentation for the simulator and oracles; they are never written to
// the trace channel the estimator reads.
std::optional<SectorHit> sector_distance(Point2 pos, double heading,
                                         const SectorSensor& sensor,
                                         const ConvexPolygon& target);

// Detecting direction as a function of zeta = xi + pi/2 - phi.
// Throws std::domain_error outside (-theta_max - pi/2, theta_max + pi/2).
double detecting_direction(double zeta, double theta_max);

// Entry distance of the ray (origin, angle) into the polygon via half-plane
// clipping of the ray against the edge supporting lines. nullopt if the ray
// misses. Fills edge/vertex feature of the entry point.
struct RayEntry {
    double distance;
    Point2 point;
    int edge = -1;
    int vertex = -1;
};
std::optional<RayEntry> ray_entry(Point2 origin, double angle,
                                  const ConvexPolygon& target);

// Convex polygon with circular arcs of the given radius in place of the
// vertices (the Minkowski sum of the core polygon and a disk). Used for the
// rounded-target demo; the estimation pipeline is unaware of it.
class RoundedPolygon {
public:
    RoundedPolygon(ConvexPolygon core, double radius);
    const ConvexPolygon& core() const { return core_; }
    double radius() const { return radius_; }
    bool contains(Point2 p, double tol = 1e-9) const;

private:
    ConvexPolygon core_;
    double radius_;
};

std::optional<SectorHit> sector_distance(Point2 pos, double heading,
                                         const SectorSensor& sensor,
                                         const RoundedPolygon& target);

using SensingTarget = std::variant<ConvexPolygon, RoundedPolygon>;

std::optional<SectorHit> sector_distance(Point2 pos, double heading,
                                         const SectorSensor& sensor,
                                         const SensingTarget& target);

}  // namespace shapesense
