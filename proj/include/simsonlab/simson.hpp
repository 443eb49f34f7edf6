#pragma once

#include "simsonlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simsonlab {

inline constexpr std::size_t kMaxPolygonVertices = 12;

/// Smallest angular distance between two angles, in [0, pi].
inline double angular_distance(double u, double v) {
    double d = std::fmod(std::abs(u - v), kTwoPi);
    return d > std::numbers::pi ? kTwoPi - d : d;
}

inline double wrap_angle(double angle) {
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// =============================================================================
// InscribedPolygon
// =============================================================================

/// Polygon inscribed in a circle, stored as vertex angles so concyclicity
/// holds by construction. Angles are strictly increasing in [0, 2pi).
class InscribedPolygon {
public:
    InscribedPolygon(Circle circle, std::vector<double> angles)
        : circle_(circle), angles_(std::move(angles)) {
        const std::size_t n = angles_.size();
        if (n < 3 || n > kMaxPolygonVertices)
            throw Error(ErrorCode::RangeError, "polygon needs between 3 and 12 vertices");
        for (std::size_t i = 0; i < n; ++i) {
            const double t = angles_[i];
            if (!std::isfinite(t) || t < 0.0 || t >= kTwoPi)
                throw Error(ErrorCode::InvalidArgument, "vertex angles must lie in [0, 2pi)");
            if (i > 0 && !(t > angles_[i - 1]))
                throw Error(ErrorCode::InvalidArgument, "vertex angles must be strictly increasing");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double gap = i + 1 < n ? angles_[i + 1] - angles_[i] : angles_[0] + kTwoPi - angles_[i];
            if (gap < tol::degeneracy_eps)
                throw Error(ErrorCode::InvalidArgument, "vertices are closer than the degeneracy threshold");
        }
    }

    /// Accepts arbitrary finite angles: wraps them into [0, 2pi) and sorts.
    static InscribedPolygon from_angles(Circle circle, std::vector<double> angles) {
        for (double& t : angles) {
            if (!std::isfinite(t))
                throw Error(ErrorCode::InvalidArgument, "vertex angles must be finite");
            t = wrap_angle(t);
        }
        std::sort(angles.begin(), angles.end());
        return InscribedPolygon(circle, std::move(angles));
    }

    static InscribedPolygon regular(Circle circle, std::size_t n, double phase) {
        std::vector<double> angles;
        angles.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            angles.push_back(phase + kTwoPi * static_cast<double>(j) / static_cast<double>(n));
        return from_angles(circle, std::move(angles));
    }

    const Circle& circle() const { return circle_; }
    const std::vector<double>& angles() const { return angles_; }
    std::size_t size() const { return angles_.size(); }
    Point vertex(std::size_t i) const { return point_on_circle(circle_, angles_[i]); }
    double scale() const { return scene_scale(circle_); }

    /// Index of a vertex within vertex_eps of theta, if any.
    std::optional<std::size_t> vertex_near(double theta) const {
        for (std::size_t i = 0; i < angles_.size(); ++i)
            if (angular_distance(theta, angles_[i]) < tol::vertex_eps) return i;
        return std::nullopt;
    }

    friend bool operator==(const InscribedPolygon&, const InscribedPolygon&) = default;

private:
    Circle circle_;
    std::vector<double> angles_;
};

struct ProbePoint {
    double theta = 0.0;
};

struct SimsonResult {
    Line line;
    std::vector<Point> feet;
    ResidualReport residual;
    bool degenerate = false;
};

/// Collinearity tolerance (relative to scene scale) for an n-gon: 1e-10 for a
/// triangle, x100 per recursion level, capped at 1e-7.
inline double collinearity_tol(std::size_t n) {
    double t = 1e-10;
    for (std::size_t level = 3; level < n; ++level) t *= 100.0;
    return std::min(t, 1e-7);
}

// =============================================================================
// Construction trace
// =============================================================================

enum class StepKind { SideLine, Perpendicular, Foot, SimsonLine };

inline std::string_view to_string(StepKind kind) {
    switch (kind) {
    case StepKind::SideLine: return "side_line";
    case StepKind::Perpendicular: return "perpendicular";
    case StepKind::Foot: return "foot";
    case StepKind::SimsonLine: return "simson_line";
    }
    return "unknown";
}

/// One drawable object of the ruler construction. `layer` matches the scene
/// display toggle it belongs to; `level` is the vertex count of the
/// (sub-)polygon that produced it and `mask` its vertex subset.
struct ConstructionStep {
    StepKind kind = StepKind::SideLine;
    std::string layer;
    std::size_t level = 0;
    std::uint32_t mask = 0;
    Line line{};
    Point point{}; // foot position, or the foot end of a perpendicular
    Point from{};  // probe end of a perpendicular
};

struct ConstructionTrace {
    InscribedPolygon polygon;
    double theta = 0.0;
    Point probe{};
    std::vector<ConstructionStep> steps;
    SimsonResult result;
};

namespace detail {

/// Recursive Simson-Wallace construction. The memo is keyed by vertex-subset
/// bitmask and lives only as long as one top-level call.
class SimsonSolver {
public:
    SimsonSolver(const InscribedPolygon& poly, Point probe, std::vector<ConstructionStep>* trace)
        : poly_(poly), probe_(probe), scale_(poly.scale()), trace_(trace),
          memo_(std::size_t{1} << poly.size()) {
        for (std::size_t i = 0; i < poly.size(); ++i) vertices_.push_back(poly.vertex(i));
    }

    const SimsonResult& solve(std::uint32_t mask) {
        auto& slot = memo_[mask];
        if (slot) return *slot;
        SimsonResult r = std::popcount(mask) == 3 ? triangle(mask) : polygon(mask);
        slot = std::move(r);
        return *slot;
    }

    std::uint32_t full_mask() const { return (std::uint32_t{1} << poly_.size()) - 1; }

private:
    std::vector<std::size_t> members(std::uint32_t mask) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < poly_.size(); ++i)
            if (mask & (std::uint32_t{1} << i)) idx.push_back(i);
        return idx;
    }

    const char* line_layer(std::uint32_t mask) const {
        return mask == full_mask() ? "simson_line" : "sub_simson_lines";
    }

    void emit(ConstructionStep step) {
        if (trace_) trace_->push_back(std::move(step));
    }

    SimsonResult triangle(std::uint32_t mask) {
        const auto idx = members(mask);
        const std::size_t level = 3;
        const std::array<std::pair<std::size_t, std::size_t>, 3> sides{
            {{idx[0], idx[1]}, {idx[0], idx[2]}, {idx[1], idx[2]}}};

        std::array<Line, 3> lines;
        for (std::size_t s = 0; s < 3; ++s) {
            lines[s] = line_through(vertices_[sides[s].first], vertices_[sides[s].second], scale_);
            emit({StepKind::SideLine, "sides", level, mask, lines[s], {}, {}});
        }
        SimsonResult r;
        for (std::size_t s = 0; s < 3; ++s) {
            const Point f = foot_of_perpendicular(probe_, lines[s]);
            r.feet.push_back(f);
            emit({StepKind::Perpendicular, "perpendiculars", level, mask, perpendicular(lines[s]), f,
                  probe_});
        }
        for (const Point& f : r.feet) emit({StepKind::Foot, "feet", level, mask, {}, f, {}});

        // Ruler construction: the line through the two most separated feet.
        std::size_t p = 0, q = 1;
        double best = distance(r.feet[0], r.feet[1]);
        if (const double d = distance(r.feet[0], r.feet[2]); d > best) { best = d; p = 0; q = 2; }
        if (const double d = distance(r.feet[1], r.feet[2]); d > best) { best = d; p = 1; q = 2; }
        if (!(best > tol::degeneracy_eps * scale_))
            throw Error(ErrorCode::DegenerateCloud, "all three feet coincide");
        r.line = line_through(r.feet[p], r.feet[q], scale_);
        for (std::size_t i = 0; i < 3; ++i) {
            const double d = std::abs(r.line.signed_distance(r.feet[i]));
            if (d > r.residual.max_abs) r.residual = {d, i};
        }
        emit({StepKind::SimsonLine, line_layer(mask), level, mask, r.line, {}, {}});
        return r;
    }

    SimsonResult polygon(std::uint32_t mask) {
        const auto idx = members(mask);
        const std::size_t level = idx.size();
        std::vector<Line> sub_lines;
        sub_lines.reserve(level);
        for (std::size_t omit : idx) sub_lines.push_back(solve(mask & ~(std::uint32_t{1} << omit)).line);

        SimsonResult r;
        for (const Line& l : sub_lines) {
            const Point f = foot_of_perpendicular(probe_, l);
            r.feet.push_back(f);
            emit({StepKind::Perpendicular, "perpendiculars", level, mask, perpendicular(l), f, probe_});
        }
        for (const Point& f : r.feet) emit({StepKind::Foot, "feet", level, mask, {}, f, {}});

        auto [line, residual] = collinearity_residual(r.feet, scale_);
        r.line = line;
        r.residual = residual;
        emit({StepKind::SimsonLine, line_layer(mask), level, mask, r.line, {}, {}});
        return r;
    }

    /// Line through the probe perpendicular to l.
    Line perpendicular(const Line& l) const {
        const Point d = l.normal();
        const double a = -d.y, b = d.x;
        return {a, b, -(a * probe_.x + b * probe_.y)};
    }

    const InscribedPolygon& poly_;
    Point probe_;
    double scale_;
    std::vector<ConstructionStep>* trace_;
    std::vector<Point> vertices_;
    std::vector<std::optional<SimsonResult>> memo_;
};

inline SimsonResult run_simson(const InscribedPolygon& poly, ProbePoint p,
                               std::vector<ConstructionStep>* trace) {
    if (!std::isfinite(p.theta))
        throw Error(ErrorCode::InvalidArgument, "probe angle must be finite");
    const Point probe = point_on_circle(poly.circle(), p.theta);
    SimsonSolver solver(poly, probe, trace);
    const bool near_vertex = poly.vertex_near(p.theta).has_value();
    try {
        SimsonResult r = solver.solve(solver.full_mask());
        r.degenerate = near_vertex;
        return r;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateCloud || !near_vertex) throw;
        // Probe on a vertex with collapsed feet: fall back to the radius
        // through the probe.
        SimsonResult r;
        r.line = line_through(probe, poly.circle().center(), poly.scale());
        r.feet.assign(poly.size(), probe);
        r.degenerate = true;
        return r;
    }
}

} // namespace detail

// =============================================================================
// Operations
// =============================================================================

/// Extended sides (I,II), (I,III), (II,III) of a triangle.
inline std::array<Line, 3> side_lines(const InscribedPolygon& poly) {
    if (poly.size() != 3)
        throw Error(ErrorCode::InvalidArgument, "side_lines expects a triangle");
    const Point v0 = poly.vertex(0), v1 = poly.vertex(1), v2 = poly.vertex(2);
    const double s = poly.scale();
    return {line_through(v0, v1, s), line_through(v0, v2, s), line_through(v1, v2, s)};
}

inline SimsonResult simson_line_triangle(const InscribedPolygon& poly, ProbePoint p) {
    if (poly.size() != 3)
        throw Error(ErrorCode::InvalidArgument, "simson_line_triangle expects a triangle");
    return detail::run_simson(poly, p, nullptr);
}

/// Simson-Wallace line of an inscribed n-gon: for n > 3, the line through the
/// feet of the perpendiculars from P onto the Simson-Wallace lines of the n
/// sub-polygons obtained by omitting each vertex in turn.
inline SimsonResult simson_line_polygon(const InscribedPolygon& poly, ProbePoint p) {
    return detail::run_simson(poly, p, nullptr);
}

/// Every intermediate object of the construction, in drawing order.
inline ConstructionTrace construction_trace(const InscribedPolygon& poly, ProbePoint p) {
    ConstructionTrace trace{poly, p.theta, point_on_circle(poly.circle(), p.theta), {}, {}};
    trace.result = detail::run_simson(poly, p, &trace.steps);
    return trace;
}

} // namespace simsonlab
