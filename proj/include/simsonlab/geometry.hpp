#pragma once

#include "simsonlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>

namespace simsonlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Relative tolerances. Lengths are compared against `tol * scale` where
/// scale is the scene scale, max(1, circumradius).
namespace tol {
inline constexpr double degeneracy_eps = 1e-9;
inline constexpr double parallel_eps = 1e-12;
inline constexpr double vertex_eps = 1e-6; // radians
} // namespace tol

// =============================================================================
// Primitives
// =============================================================================

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point p, Point q) { return {p.x + q.x, p.y + q.y}; }
    friend constexpr Point operator-(Point p, Point q) { return {p.x - q.x, p.y - q.y}; }
    friend constexpr Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
    friend constexpr Point operator*(Point p, double s) { return {s * p.x, s * p.y}; }
    friend constexpr bool operator==(Point, Point) = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr double dot(Point p, Point q) { return p.x * q.x + p.y * q.y; }
constexpr double cross(Point p, Point q) { return p.x * q.y - p.y * q.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point p, Point q) { return norm(q - p); }

/// Rotation of p about the origin by angle (radians, counter-clockwise).
inline Point rotate(Point p, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Implicit line a*x + b*y + c = 0 with (a, b) a unit normal.
struct Line {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;

    friend constexpr bool operator==(const Line&, const Line&) = default;

    /// Signed distance of p from the line (positive on the normal side).
    double signed_distance(Point p) const { return a * p.x + b * p.y + c; }
    Point normal() const { return {a, b}; }
    /// Direction vector; the normal is its left-hand normal.
    Point direction() const { return {b, -a}; }
    Line flipped() const { return {-a, -b, -c}; }
};

class Circle {
public:
    Circle() = default;
    Circle(Point center, double radius) : center_(center), radius_(radius) {
        if (!center.finite())
            throw Error(ErrorCode::InvalidArgument, "circle center must be finite");
        if (!std::isfinite(radius) || radius <= 0.0)
            throw Error(ErrorCode::InvalidArgument, "circle radius must be positive and finite");
    }

    Point center() const { return center_; }
    double radius() const { return radius_; }

    friend bool operator==(const Circle&, const Circle&) = default;

private:
    Point center_{};
    double radius_ = 1.0;
};

/// Reference length for relative tolerances.
inline double scene_scale(const Circle& circle) { return std::max(1.0, circle.radius()); }

struct ResidualReport {
    double max_abs = 0.0;
    std::size_t which = 0;
};

// =============================================================================
// Constructions
// =============================================================================

inline Point point_on_circle(const Circle& circle, double angle) {
    if (!std::isfinite(angle))
        throw Error(ErrorCode::InvalidArgument, "angle must be finite");
    const Point c = circle.center();
    return {c.x + circle.radius() * std::cos(angle), c.y + circle.radius() * std::sin(angle)};
}

/// Normalized line through p and q; (a, b) is the left-hand normal of q - p.
inline Line line_through(Point p, Point q, double scale = 1.0) {
    const Point d = q - p;
    const double len = norm(d);
    if (!(len > tol::degeneracy_eps * scale))
        throw Error(ErrorCode::CoincidentPoints, "points are too close to define a line");
    const double a = -d.y / len;
    const double b = d.x / len;
    return {a, b, -(a * p.x + b * p.y)};
}

inline Point foot_of_perpendicular(Point p, const Line& l) {
    const double s = l.signed_distance(p);
    return {p.x - s * l.a, p.y - s * l.b};
}

inline Point line_intersection(const Line& l1, const Line& l2) {
    const double det = l1.a * l2.b - l2.a * l1.b;
    if (std::abs(det) < tol::parallel_eps)
        throw Error(ErrorCode::NearParallel, "lines are parallel or nearly so");
    return {(l1.b * l2.c - l2.b * l1.c) / det, (l1.c * l2.a - l2.c * l1.a) / det};
}

/// Orthogonal-regression line of a point cloud with the worst perpendicular
/// distance. Sign convention: a >= 0, ties broken by b >= 0.
inline std::pair<Line, ResidualReport> collinearity_residual(std::span<const Point> points,
                                                              double scale = 1.0) {
    if (points.size() < 3)
        throw Error(ErrorCode::InvalidArgument, "collinearity needs at least three points");

    Point mean{};
    for (const Point& p : points) mean = mean + p;
    mean = (1.0 / static_cast<double>(points.size())) * mean;

    double sxx = 0.0, sxy = 0.0, syy = 0.0, spread = 0.0;
    for (const Point& p : points) {
        const Point d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        spread = std::max(spread, norm(d));
    }
    if (!(spread > tol::degeneracy_eps * scale))
        throw Error(ErrorCode::DegenerateCloud, "all points coincide");

    // Principal axis of the 2x2 scatter matrix; the normal is perpendicular to it.
    const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double a = -std::sin(phi);
    double b = std::cos(phi);
    constexpr double tie = 1e-14;
    if (a < -tie || (std::abs(a) <= tie && b < 0.0)) {
        a = -a;
        b = -b;
    }
    const Line line{a, b, -(a * mean.x + b * mean.y)};

    ResidualReport report;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = std::abs(line.signed_distance(points[i]));
        if (d > report.max_abs) {
            report.max_abs = d;
            report.which = i;
        }
    }
    return {line, report};
}

inline Circle circumcircle(Point a, Point b, Point c) {
    const double span = std::max({distance(a, b), distance(a, c), distance(b, c)});
    const double scale = std::max(1.0, 0.5 * span);
    const Point pts[] = {a, b, c};
    try {
        const auto [line, residual] = collinearity_residual(pts, scale);
        if (residual.max_abs <= tol::degeneracy_eps * scale)
            throw Error(ErrorCode::CollinearInput, "circumcircle of collinear points");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateCloud)
            throw Error(ErrorCode::CollinearInput, "circumcircle of coincident points");
        throw;
    }

    // Solve relative to a for accuracy.
    const Point ab = b - a;
    const Point ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    const Point offset{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
    return Circle{a + offset, norm(offset)};
}

} // namespace simsonlab
