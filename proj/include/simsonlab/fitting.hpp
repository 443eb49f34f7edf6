#pragma once

#include "simsonlab/curves.hpp"
#include "simsonlab/envelope.hpp"
#include "simsonlab/geometry.hpp"
#include "simsonlab/simson.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simsonlab {

namespace fit_tol {
inline constexpr double max_dev = 5e-3;          // relative to the fitted fixed radius
inline constexpr std::size_t dense_samples = 4096;
inline constexpr std::size_t min_trace_points = 64;
} // namespace fit_tol

enum class FitReason { Ok, NotEnoughCusps, CuspCountMismatch, MaxDevExceeded };

inline std::string_view to_string(FitReason reason) {
    switch (reason) {
    case FitReason::Ok: return "ok";
    case FitReason::NotEnoughCusps: return "not_enough_cusps";
    case FitReason::CuspCountMismatch: return "cusp_count_mismatch";
    case FitReason::MaxDevExceeded: return "max_dev_exceeded";
    }
    return "unknown";
}

struct TraceStats {
    std::size_t samples = 0; // family size the trace was extracted from
    std::size_t points = 0;
    std::size_t dropped = 0;
};

struct FitReport {
    HypocycloidSpec spec;
    double rms = 0.0;
    double max_dev = 0.0;
    int n_cusps_detected = 0;
    int expected_cusps = 0;
    bool passed = false;
    FitReason reason = FitReason::Ok;
    std::string notes;
    double tolerance = fit_tol::max_dev;
    TraceStats trace;
    std::optional<Circle> circle;        // circumcircle, when fitted from a polygon
    std::optional<double> center_offset; // |fitted center - circle center|
};

// =============================================================================
// Distance to a hypocycloid
// =============================================================================

/// Dense sample of the unit-radius hypocycloid with k cusps, bucketed on a
/// uniform grid for nearest-sample queries. Distances to any spec are taken in
/// this canonical frame and scaled back.
class CanonicalCurve {
public:
    explicit CanonicalCurve(int cusps, std::size_t samples = fit_tol::dense_samples)
        : cusps_(cusps), samples_(samples), cell_(2.0 * kExtent / kGrid), buckets_(kGrid * kGrid) {
        points_.reserve(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            const Point p = detail::hypocycloid_local(1.0, cusps_, param(i));
            points_.push_back(p);
            buckets_[bucket_of(cell_index(p.x), cell_index(p.y))].push_back(i);
        }
    }

    int cusps() const { return cusps_; }

    /// Distance from u to the curve (canonical units) and the curve parameter
    /// of the nearest point.
    std::pair<double, double> nearest(Point u) const {
        const double t0 = param(nearest_sample(u));
        const double h = kTwoPi / static_cast<double>(samples_);
        const double period = kTwoPi / static_cast<double>(cusps_);
        const double cusp = std::round(t0 / period) * period;
        if (std::abs(t0 - cusp) > kCuspWindow * h) return polish(u, t0 - h, t0 + h);
        // Both branches leave a cusp along the same tangent, so the nearest
        // sample may sit on the wrong side of it. Search each branch apart.
        const double reach = (kCuspWindow + 2.0) * h;
        const auto right = polish(u, cusp + kCuspOffset, cusp + reach);
        const auto left = polish(u, cusp - reach, cusp - kCuspOffset);
        return right.first <= left.first ? right : left;
    }

private:
    static constexpr double kExtent = 1.05;
    static constexpr std::size_t kGrid = 64;
    static constexpr double kCuspWindow = 32.0;
    static constexpr double kCuspOffset = 1e-9;

    double param(std::size_t i) const { return kTwoPi * static_cast<double>(i) / static_cast<double>(samples_); }

    long cell_index(double v) const {
        return std::clamp(static_cast<long>(std::floor((v + kExtent) / cell_)), 0L, static_cast<long>(kGrid) - 1);
    }
    std::size_t bucket_of(long ix, long iy) const {
        return static_cast<std::size_t>(iy) * kGrid + static_cast<std::size_t>(ix);
    }

    std::size_t nearest_sample(Point u) const {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        auto consider = [&](std::size_t i) {
            const Point d = points_[i] - u;
            const double d2 = dot(d, d);
            if (d2 < best) { best = d2; best_i = i; }
        };
        if (std::abs(u.x) >= kExtent || std::abs(u.y) >= kExtent) {
            for (std::size_t i = 0; i < samples_; ++i) consider(i);
            return best_i;
        }
        const long cx = cell_index(u.x), cy = cell_index(u.y);
        const long g = static_cast<long>(kGrid);
        for (long ring = 0; ring < g; ++ring) {
            for (long iy = cy - ring; iy <= cy + ring; ++iy) {
                if (iy < 0 || iy >= g) continue;
                const bool edge_row = iy == cy - ring || iy == cy + ring;
                for (long ix = cx - ring; ix <= cx + ring; ix += (edge_row || ring == 0) ? 1 : 2 * ring) {
                    if (ix < 0 || ix >= g) continue;
                    for (std::size_t i : buckets_[bucket_of(ix, iy)]) consider(i);
                }
            }
            // Anything outside this ring is at least ring * cell away.
            const double reach = static_cast<double>(ring) * cell_;
            if (best <= reach * reach) break;
        }
        return best_i;
    }

    /// Minimizes the squared distance over [lo, hi]: Newton on its derivative,
    /// falling back to bisection whenever a step leaves the bracket.
    std::pair<double, double> polish(Point u, double lo, double hi) const {
        auto sq = [&](double t) {
            const Point d = detail::hypocycloid_local(1.0, cusps_, t) - u;
            return dot(d, d);
        };
        auto slope = [&](double t) {
            const Point d = detail::hypocycloid_local(1.0, cusps_, t) - u;
            const Point v = detail::hypocycloid_local_velocity(1.0, cusps_, t);
            const Point acc = detail::hypocycloid_local_acceleration(1.0, cusps_, t);
            return std::pair{dot(d, v), dot(v, v) + dot(d, acc)};
        };
        double best_t = lo, best_f = sq(lo);
        for (double t : {0.5 * (lo + hi), hi}) {
            if (const double f = sq(t); f < best_f) { best_f = f; best_t = t; }
        }
        if (!(slope(lo).first < 0.0 && slope(hi).first > 0.0)) return {std::sqrt(best_f), best_t};

        double t = 0.5 * (lo + hi);
        for (int iter = 0; iter < 100; ++iter) {
            const auto [g, gp] = slope(t);
            if (g == 0.0) break;
            if (g < 0.0) lo = t; else hi = t;
            double next = gp > 0.0 ? t - g / gp : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
                t = next;
                break;
            }
            t = next;
        }
        if (const double f = sq(t); f < best_f) { best_f = f; best_t = t; }
        return {std::sqrt(best_f), best_t};
    }

    int cusps_;
    std::size_t samples_;
    double cell_;
    std::vector<Point> points_;
    std::vector<std::vector<std::size_t>> buckets_;
};

inline double distance_to_curve(const CanonicalCurve& curve, const HypocycloidSpec& spec, Point q) {
    const double radius = spec.fixed_radius();
    const Point u = (1.0 / radius) * rotate(q - spec.center(), -spec.phase());
    return radius * curve.nearest(u).first;
}

inline double distance_to_curve(const HypocycloidSpec& spec, Point q) {
    return distance_to_curve(CanonicalCurve(spec.cusps()), spec, q);
}

// =============================================================================
// Fitting
// =============================================================================

namespace detail {

struct Deviation {
    double sum_sq = 0.0;
    double max_abs = 0.0;
};

inline Deviation deviation(const CanonicalCurve& curve, const HypocycloidSpec& spec,
                           std::span<const Point> points) {
    Deviation d;
    for (const Point& q : points) { // ascending index: fixed reduction order
        const double dist = distance_to_curve(curve, spec, q);
        d.sum_sq += dist * dist;
        d.max_abs = std::max(d.max_abs, dist);
    }
    return d;
}

/// Derivative-free coordinate descent over (center x, center y, radius,
/// phase). Each coordinate keeps its own step: doubled after a successful
/// move, halved when neither direction improves.
inline HypocycloidSpec refine(const CanonicalCurve& curve, HypocycloidSpec start,
                              std::span<const Point> points) {
    const int k = start.cusps();
    const double r0 = start.fixed_radius();
    std::array<double, 4> x{start.center().x, start.center().y, r0, start.phase()};
    std::array<double, 4> step{0.02 * r0, 0.02 * r0, 0.02 * r0, 0.02};
    const std::array<double, 4> max_step = step;
    const std::array<double, 4> min_step{1e-12 * r0, 1e-12 * r0, 1e-12 * r0, 1e-12};

    auto make = [k](const std::array<double, 4>& v) { return HypocycloidSpec({v[0], v[1]}, v[2], k, v[3]); };
    auto cost = [&](const std::array<double, 4>& v) { return deviation(curve, make(v), points).sum_sq; };

    double best = cost(x);
    constexpr int kMaxEvaluations = 6000;
    int evaluations = 1;
    while (evaluations < kMaxEvaluations) {
        bool active = false;
        for (std::size_t p = 0; p < 4; ++p) {
            if (step[p] < min_step[p]) continue;
            active = true;
            bool moved = false;
            for (double dir : {1.0, -1.0}) {
                auto trial = x;
                trial[p] += dir * step[p];
                if (p == 2 && !(trial[p] > 0.0)) continue;
                const double f = cost(trial);
                ++evaluations;
                if (f < best) {
                    best = f;
                    x = trial;
                    moved = true;
                    break;
                }
            }
            step[p] = moved ? std::min(2.0 * step[p], max_step[p]) : 0.5 * step[p];
        }
        if (!active) break;
    }
    return make(x);
}

inline void finalize(FitReport& report) {
    const double radius = report.spec.fixed_radius();
    if (report.n_cusps_detected < 3) {
        report.passed = false;
        report.reason = FitReason::NotEnoughCusps;
    } else if (report.n_cusps_detected != report.expected_cusps) {
        report.passed = false;
        report.reason = FitReason::CuspCountMismatch;
    } else if (!(report.max_dev <= report.tolerance * radius)) {
        report.passed = false;
        report.reason = FitReason::MaxDevExceeded;
    } else {
        report.passed = true;
        report.reason = FitReason::Ok;
    }
}

} // namespace detail

/// Fits a k-cusped hypocycloid to an envelope trace. Starts from the detected
/// cusps (centroid, mean radius, polar angle of the first cusp) and refines
/// by coordinate descent on the summed squared distance to the curve.
inline FitReport fit_hypocycloid(const EnvelopeTrace& trace, int k) {
    if (k < 3) throw Error(ErrorCode::InvalidArgument, "cusp count must be at least 3");
    if (trace.points.size() < fit_tol::min_trace_points)
        throw Error(ErrorCode::TooFewSamples, "fitting needs a trace of at least 64 points");

    FitReport report;
    report.expected_cusps = k;
    report.trace = {trace.points.size() + trace.dropped.size(), trace.points.size(), trace.dropped.size()};

    const std::vector<Cusp> cusps = detect_cusps(trace);
    report.n_cusps_detected = static_cast<int>(cusps.size());
    const CanonicalCurve curve(k);

    if (cusps.size() < 3) {
        // No usable initialization: report the trace's centroid and extent.
        Point c{};
        for (const Point& p : trace.points) c = c + p;
        c = (1.0 / static_cast<double>(trace.points.size())) * c;
        double radius = 0.0;
        for (const Point& p : trace.points) radius = std::max(radius, distance(p, c));
        report.spec = HypocycloidSpec(c, radius > 0.0 ? radius : 1.0, k, 0.0);
        report.notes = "fewer than 3 cusps detected (" + std::to_string(cusps.size()) + "); shape not fitted";
    } else {
        Point c{};
        for (const Cusp& cusp : cusps) c = c + cusp.point;
        c = (1.0 / static_cast<double>(cusps.size())) * c;
        double radius = 0.0;
        for (const Cusp& cusp : cusps) radius += distance(cusp.point, c);
        radius /= static_cast<double>(cusps.size());
        const Point first = cusps.front().point - c;
        const HypocycloidSpec start(c, radius, k, std::atan2(first.y, first.x));
        report.spec = detail::refine(curve, start, trace.points);
        report.notes = std::to_string(cusps.size()) + " cusps detected, " + std::to_string(k) + " expected";
    }

    const detail::Deviation dev = detail::deviation(curve, report.spec, trace.points);
    report.max_dev = dev.max_abs;
    report.rms = std::sqrt(dev.sum_sq / static_cast<double>(trace.points.size()));
    report.rms = std::min(report.rms, report.max_dev);
    detail::finalize(report);
    return report;
}

/// Optional mutation applied to the extracted trace before fitting.
using TraceHook = std::function<EnvelopeTrace(EnvelopeTrace)>;

/// Full pipeline: family, envelope, cusps, fit against `expected_cusps`.
inline FitReport verify_claim(const InscribedPolygon& poly, int expected_cusps, std::size_t n_samples,
                              const TraceHook& hook = {}) {
    const LineFamily family = build_family(poly, n_samples);
    EnvelopeTrace trace = envelope_points(family);
    if (hook) trace = hook(std::move(trace));
    FitReport report = fit_hypocycloid(trace, expected_cusps);
    report.trace.samples = n_samples;
    report.circle = poly.circle();
    report.center_offset = distance(report.spec.center(), poly.circle().center());
    return report;
}

/// Deltoid fit of a triangle's envelope, annotated with how far the fitted
/// center sits from the circumcircle center.
inline FitReport scalene_report(const InscribedPolygon& poly, std::size_t n_samples) {
    if (poly.size() != 3)
        throw Error(ErrorCode::InvalidArgument, "scalene_report expects a triangle");
    FitReport report = verify_claim(poly, 3, n_samples);
    const double offset = *report.center_offset;
    const double radius = poly.circle().radius();
    char buf[160];
    std::snprintf(buf, sizeof buf, "; center offset from circle center %.6g (%.6g of circumradius)", offset,
                  offset / radius);
    report.notes += buf;
    return report;
}

} // namespace simsonlab
