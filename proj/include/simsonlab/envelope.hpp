#pragma once

#include "simsonlab/geometry.hpp"
#include "simsonlab/simson.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace simsonlab {

namespace envelope_tol {
inline constexpr double min_det = 1e-8;         // conditioning of the L, L' solve
inline constexpr double min_delta = 1e-6;       // radians, fallback chord limit
inline constexpr double cusp_speed_factor = 0.1;
inline constexpr std::size_t min_family = 32;
inline constexpr std::size_t min_cusp_points = 64;
inline constexpr std::size_t max_family = 1'000'000;
} // namespace envelope_tol

struct LineFamily {
    InscribedPolygon polygon;
    std::vector<double> thetas;
    std::vector<Line> lines;
};

struct EnvelopeTrace {
    std::vector<double> thetas;
    std::vector<Point> points;
    std::vector<double> speeds;
    std::vector<std::size_t> cusp_indices;
    std::vector<double> dropped; // thetas whose envelope point could not be resolved
};

struct Cusp {
    double theta = 0.0;
    Point point{};
    std::size_t index = 0;
};

/// Flips l so its normal points the same way as the reference normal.
inline Line align_to(const Line& l, const Line& reference) {
    return dot(l.normal(), reference.normal()) < 0.0 ? l.flipped() : l;
}

// =============================================================================
// Family
// =============================================================================

/// Simson-Wallace lines on a uniform probe grid. Grid angles within vertex_eps
/// of a vertex are moved just past it; any that still come back degenerate are
/// left out.
/// Sample i of an n-point uniform grid over [0, 2pi), moved just past any
/// vertex it lands on.
inline double family_theta(const InscribedPolygon& poly, std::size_t i, std::size_t n_samples) {
    const double theta = kTwoPi * static_cast<double>(i) / static_cast<double>(n_samples);
    if (const auto v = poly.vertex_near(theta)) return wrap_angle(poly.angles()[*v] + 1.001 * tol::vertex_eps);
    return theta;
}

inline LineFamily build_family(const InscribedPolygon& poly, std::size_t n_samples) {
    if (n_samples < envelope_tol::min_family)
        throw Error(ErrorCode::TooFewSamples, "line family needs at least 32 samples");
    if (n_samples > envelope_tol::max_family)
        throw Error(ErrorCode::RangeError, "line family is limited to 1e6 samples");

    LineFamily family{poly, {}, {}};
    family.thetas.reserve(n_samples);
    family.lines.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double theta = family_theta(poly, i, n_samples);
        const SimsonResult r = simson_line_polygon(poly, {theta});
        if (r.degenerate) continue;
        family.thetas.push_back(theta);
        family.lines.push_back(r.line);
    }
    return family;
}

// =============================================================================
// Envelope extraction
// =============================================================================

namespace detail {

/// Weights of the derivative at x[center] of the Lagrange interpolant through x.
template <std::size_t N>
std::array<double, N> derivative_weights(const std::array<double, N>& x, std::size_t center) {
    std::array<double, N> w{};
    const double xc = x[center];
    for (std::size_t j = 0; j < N; ++j) {
        if (j == center) {
            double s = 0.0;
            for (std::size_t m = 0; m < N; ++m)
                if (m != center) s += 1.0 / (xc - x[m]);
            w[j] = s;
            continue;
        }
        double p = 1.0 / (x[j] - xc);
        for (std::size_t m = 0; m < N; ++m)
            if (m != j && m != center) p *= (xc - x[m]) / (x[j] - x[m]);
        w[j] = p;
    }
    return w;
}

/// Theta of sample i + offset on a closed grid, unwrapped around sample i.
inline double unwrapped_theta(std::span<const double> thetas, std::size_t i, long offset) {
    const long n = static_cast<long>(thetas.size());
    long j = static_cast<long>(i) + offset;
    double shift = 0.0;
    while (j < 0) { j += n; shift -= kTwoPi; }
    while (j >= n) { j -= n; shift += kTwoPi; }
    return thetas[static_cast<std::size_t>(j)] + shift;
}

inline std::size_t wrap_index(std::size_t i, long offset, std::size_t n) {
    long j = (static_cast<long>(i) + offset) % static_cast<long>(n);
    if (j < 0) j += static_cast<long>(n);
    return static_cast<std::size_t>(j);
}

/// Chord fallback: intersect L(theta) with L(theta + delta), halving delta
/// until two successive intersections agree or delta drops below min_delta.
inline std::optional<Point> chord_envelope_point(const Line& line, double theta, double delta,
                                                 const std::function<Line(double)>& line_at,
                                                 double scale) {
    if (!line_at) return std::nullopt;
    bool have_previous = false;
    Point previous{};
    for (; delta >= envelope_tol::min_delta; delta *= 0.5) {
        const Line other = align_to(line_at(theta + delta), line);
        const double det = line.a * other.b - other.a * line.b;
        if (std::abs(det) < tol::parallel_eps) {
            have_previous = false;
            continue;
        }
        const Point p = line_intersection(line, other);
        if (have_previous && distance(previous, p) <= tol::degeneracy_eps * scale) return p;
        previous = p;
        have_previous = true;
    }
    return std::nullopt;
}

} // namespace detail

/// Detects cusps as strict local minima of the speed profile (circular) that
/// fall below cusp_speed_factor times the median speed.
inline std::vector<std::size_t> cusp_candidates(std::span<const double> speeds) {
    std::vector<std::size_t> out;
    const std::size_t n = speeds.size();
    if (n < envelope_tol::min_cusp_points) return out;
    std::vector<double> sorted(speeds.begin(), speeds.end());
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double threshold = envelope_tol::cusp_speed_factor * sorted[n / 2];
    for (std::size_t i = 0; i < n; ++i) {
        const double s = speeds[i];
        const double prev = speeds[detail::wrap_index(i, -1, n)];
        const double next = speeds[detail::wrap_index(i, 1, n)];
        if (s < prev && s < next && s < threshold) out.push_back(i);
    }
    return out;
}

/// Assembles a closed trace from ordered samples: central-difference speeds
/// and cusp indices.
inline EnvelopeTrace make_trace(std::vector<double> thetas, std::vector<Point> points) {
    if (thetas.size() != points.size())
        throw Error(ErrorCode::InvalidArgument, "trace thetas and points differ in length");
    if (thetas.size() < 3)
        throw Error(ErrorCode::TooFewSamples, "trace needs at least three points");
    EnvelopeTrace trace;
    const std::size_t n = points.size();
    trace.speeds.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point prev = points[detail::wrap_index(i, -1, n)];
        const Point next = points[detail::wrap_index(i, 1, n)];
        const double span = detail::unwrapped_theta(thetas, i, 1) - detail::unwrapped_theta(thetas, i, -1);
        trace.speeds[i] = distance(prev, next) / span;
    }
    trace.thetas = std::move(thetas);
    trace.points = std::move(points);
    trace.cusp_indices = cusp_candidates(trace.speeds);
    return trace;
}

/// Envelope of a closed line family given on a theta grid over [0, 2pi).
/// Each point solves L = 0, L' = 0 with L' from a five-point central stencil
/// on sign-aligned coefficients. `line_at` re-evaluates the family off-grid
/// for the chord fallback; without it ill-conditioned samples are dropped.
inline EnvelopeTrace envelope_points(std::span<const double> thetas, std::span<const Line> lines,
                                     const std::function<Line(double)>& line_at, double scale) {
    if (thetas.size() != lines.size())
        throw Error(ErrorCode::InvalidArgument, "family thetas and lines differ in length");
    const std::size_t n = lines.size();
    if (n < envelope_tol::min_family)
        throw Error(ErrorCode::TooFewSamples, "envelope extraction needs at least 32 lines");

    constexpr std::size_t kStencil = 5;
    constexpr long kHalf = 2;
    std::vector<double> kept_thetas;
    std::vector<Point> kept_points;
    std::vector<double> dropped;
    for (std::size_t i = 0; i < n; ++i) {
        const Line& line = lines[i];
        std::array<double, kStencil> x{};
        std::array<Line, kStencil> stencil{};
        for (long o = -kHalf; o <= kHalf; ++o) {
            const auto slot = static_cast<std::size_t>(o + kHalf);
            x[slot] = detail::unwrapped_theta(thetas, i, o);
            stencil[slot] = align_to(lines[detail::wrap_index(i, o, n)], line);
        }
        const auto w = detail::derivative_weights(x, static_cast<std::size_t>(kHalf));
        Line d{0.0, 0.0, 0.0};
        for (std::size_t s = 0; s < kStencil; ++s) {
            d.a += w[s] * stencil[s].a;
            d.b += w[s] * stencil[s].b;
            d.c += w[s] * stencil[s].c;
        }
        const double det = line.a * d.b - line.b * d.a;
        std::optional<Point> p;
        if (std::abs(det) >= envelope_tol::min_det) {
            p = Point{(line.b * d.c - d.b * line.c) / det, (line.c * d.a - d.c * line.a) / det};
        } else {
            const double step = detail::unwrapped_theta(thetas, i, 1) - thetas[i];
            p = detail::chord_envelope_point(line, thetas[i], step, line_at, scale);
        }
        if (p && p->finite()) {
            kept_thetas.push_back(thetas[i]);
            kept_points.push_back(*p);
        } else {
            dropped.push_back(thetas[i]);
        }
    }
    if (kept_points.size() < 3)
        throw Error(ErrorCode::TooFewSamples, "envelope extraction resolved fewer than three points");
    EnvelopeTrace trace = make_trace(std::move(kept_thetas), std::move(kept_points));
    trace.dropped = std::move(dropped);
    return trace;
}

inline EnvelopeTrace envelope_points(const LineFamily& family) {
    const InscribedPolygon& poly = family.polygon;
    auto line_at = [&poly](double theta) { return simson_line_polygon(poly, {theta}).line; };
    return envelope_points(family.thetas, family.lines, line_at, poly.scale());
}

/// Cusps of a trace, refined by a parabola through the speeds around each
/// candidate. Returns nothing for traces shorter than 64 points.
inline std::vector<Cusp> detect_cusps(const EnvelopeTrace& trace) {
    std::vector<Cusp> out;
    const std::size_t n = trace.points.size();
    if (n < envelope_tol::min_cusp_points) return out;
    for (std::size_t i : cusp_candidates(trace.speeds)) {
        const std::size_t ip = detail::wrap_index(i, -1, n);
        const std::size_t in = detail::wrap_index(i, 1, n);
        const double h0 = trace.thetas[i] - detail::unwrapped_theta(trace.thetas, i, -1);
        const double h1 = detail::unwrapped_theta(trace.thetas, i, 1) - trace.thetas[i];
        const double s0 = trace.speeds[ip], s1 = trace.speeds[i], s2 = trace.speeds[in];

        // Vertex of the parabola through (-h0, s0), (0, s1), (h1, s2).
        const double d0 = (s1 - s0) / h0;
        const double d1 = (s2 - s1) / h1;
        const double curvature = (d1 - d0) / (h0 + h1);
        double offset = 0.0;
        if (curvature > 0.0) {
            const double slope_at_zero = d0 + curvature * h0;
            offset = std::clamp(-slope_at_zero / (2.0 * curvature), -h0, h1);
        }

        // Quadratic interpolation of the position at the refined parameter.
        const double l0 = offset * (offset - h1) / (h0 * (h0 + h1));
        const double l1 = (offset + h0) * (h1 - offset) / (h0 * h1);
        const double l2 = offset * (offset + h0) / (h1 * (h0 + h1));
        const Point p = l0 * trace.points[ip] + l1 * trace.points[i] + l2 * trace.points[in];
        out.push_back({wrap_angle(trace.thetas[i] + offset), p, i});
    }
    return out;
}

} // namespace simsonlab
