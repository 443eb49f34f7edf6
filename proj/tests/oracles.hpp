#pragma once

// Test-only reference implementations. None of these call into the library's
// construction code; they exist to check it.

#include "simsonlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using simsonlab::Point;

/// Foot of the perpendicular from p onto the line through u and v, by
/// projecting p - u onto v - u.
inline Point project_onto(Point p, Point u, Point v) {
    const double dx = v.x - u.x, dy = v.y - u.y;
    const double t = ((p.x - u.x) * dx + (p.y - u.y) * dy) / (dx * dx + dy * dy);
    return {u.x + t * dx, u.y + t * dy};
}

/// A line kept as a point and a unit direction.
struct RayLine {
    Point origin;
    Point dir;
};

inline Point project_onto(Point p, const RayLine& l) {
    const double t = (p.x - l.origin.x) * l.dir.x + (p.y - l.origin.y) * l.dir.y;
    return {l.origin.x + t * l.dir.x, l.origin.y + t * l.dir.y};
}

/// Orthogonal regression through the closed-form smallest eigenvector of the
/// 2x2 scatter matrix.
inline RayLine tls_line(const std::vector<Point>& pts) {
    double mx = 0.0, my = 0.0;
    for (const Point& p : pts) { mx += p.x; my += p.y; }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const Point& p : pts) {
        sxx += (p.x - mx) * (p.x - mx);
        syy += (p.y - my) * (p.y - my);
        sxy += (p.x - mx) * (p.y - my);
    }
    // Largest eigenvalue's eigenvector is the line direction.
    const double lambda = 0.5 * (sxx + syy) + std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
    Point dir = std::abs(sxy) > 0.0 ? Point{lambda - syy, sxy} : (sxx >= syy ? Point{1, 0} : Point{0, 1});
    const double len = std::hypot(dir.x, dir.y);
    return {{mx, my}, {dir.x / len, dir.y / len}};
}

/// Naive recursive Simson-Wallace construction, without memoization. Returns
/// the feet at the top level.
inline RayLine naive_simson(const std::vector<Point>& vertices, Point probe, std::vector<Point>* feet_out) {
    std::vector<Point> feet;
    if (vertices.size() == 3) {
        const Point& a = vertices[0];
        const Point& b = vertices[1];
        const Point& c = vertices[2];
        feet = {project_onto(probe, a, b), project_onto(probe, a, c), project_onto(probe, b, c)};
        // Ruler construction: the two most separated feet.
        int p = 0, q = 1;
        auto sep = [&](int i, int j) { return std::hypot(feet[i].x - feet[j].x, feet[i].y - feet[j].y); };
        double best = sep(0, 1);
        if (sep(0, 2) > best) { best = sep(0, 2); p = 0; q = 2; }
        if (sep(1, 2) > best) { p = 1; q = 2; }
        const Point d{feet[q].x - feet[p].x, feet[q].y - feet[p].y};
        const double len = std::hypot(d.x, d.y);
        if (feet_out) *feet_out = feet;
        return {feet[p], {d.x / len, d.y / len}};
    }
    for (std::size_t omit = 0; omit < vertices.size(); ++omit) {
        std::vector<Point> sub;
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (i != omit) sub.push_back(vertices[i]);
        feet.push_back(project_onto(probe, naive_simson(sub, probe, nullptr)));
    }
    if (feet_out) *feet_out = feet;
    return tls_line(feet);
}

/// Rolling-circle kinematics: a disk of radius R/k rolls inside a fixed circle
/// of radius R; the traced point starts at the contact point (R, 0). The disk
/// orientation is integrated from the no-slip constraint in `steps` substeps.
inline Point rolling_circle_point(double fixed_radius, int k, double t, int steps = 20000) {
    const double r = fixed_radius / k;
    double contact = 0.0; // polar angle of the contact point
    double spin = 0.0;    // orientation of the traced material point
    const double dt = t / steps;
    for (int i = 0; i < steps; ++i) {
        // No slip: arc R*d(contact) on the fixed circle equals arc r*(d(contact) - d(spin)) on the disk.
        contact += dt;
        spin += dt - fixed_radius * dt / r;
    }
    const double cx = (fixed_radius - r) * std::cos(contact);
    const double cy = (fixed_radius - r) * std::sin(contact);
    return {cx + r * std::cos(spin), cy + r * std::sin(spin)};
}

// =============================================================================
// Random inputs
// =============================================================================

/// Sorted angles in [0, 2pi) with pairwise circular separation >= min_sep.
inline std::vector<double> random_angles(std::mt19937_64& rng, std::size_t n, double min_sep) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (;;) {
        std::vector<double> a(n);
        for (double& t : a) t = u(rng);
        std::sort(a.begin(), a.end());
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            const double gap = i + 1 < n ? a[i + 1] - a[i] : a[0] + 2.0 * std::numbers::pi - a[i];
            ok = gap >= min_sep;
        }
        if (ok) return a;
    }
}

inline double circular_gap(double u, double v) {
    double d = std::fmod(std::abs(u - v), 2.0 * std::numbers::pi);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

/// Probe angle at least `margin` away from every vertex angle.
inline double random_probe(std::mt19937_64& rng, const std::vector<double>& vertices, double margin) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (;;) {
        const double t = u(rng);
        if (std::all_of(vertices.begin(), vertices.end(), [&](double v) { return circular_gap(t, v) >= margin; }))
            return t;
    }
}

} // namespace oracle
