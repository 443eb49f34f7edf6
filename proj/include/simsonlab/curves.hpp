#pragma once

#include "simsonlab/geometry.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace simsonlab {

/// Hypocycloid traced by a circle of radius R/k rolling inside a fixed circle
/// of radius R. Closed with k cusps; one cusp sits at polar angle `phase`
/// around `center`.
class HypocycloidSpec {
public:
    HypocycloidSpec() = default;
    HypocycloidSpec(Point center, double fixed_radius, int cusps, double phase = 0.0)
        : center_(center), fixed_radius_(fixed_radius), cusps_(cusps), phase_(phase) {
        if (!center.finite() || !std::isfinite(phase))
            throw Error(ErrorCode::InvalidArgument, "hypocycloid center and phase must be finite");
        if (!std::isfinite(fixed_radius) || fixed_radius <= 0.0)
            throw Error(ErrorCode::InvalidArgument, "hypocycloid fixed radius must be positive");
        if (cusps < 3)
            throw Error(ErrorCode::InvalidArgument, "hypocycloid needs at least three cusps");
    }

    /// Builds a spec from the two radii; only integer ratios R/r close the curve.
    static HypocycloidSpec from_radii(Point center, double fixed_radius, double rolling_radius,
                                      double phase = 0.0) {
        if (!(rolling_radius > 0.0))
            throw Error(ErrorCode::InvalidArgument, "rolling radius must be positive");
        const double ratio = fixed_radius / rolling_radius;
        const double k = std::round(ratio);
        if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio))
            throw Error(ErrorCode::InvalidArgument, "fixed/rolling radius ratio must be an integer");
        return HypocycloidSpec(center, fixed_radius, static_cast<int>(k), phase);
    }

    Point center() const { return center_; }
    double fixed_radius() const { return fixed_radius_; }
    double rolling_radius() const { return fixed_radius_ / cusps_; }
    int cusps() const { return cusps_; }
    double phase() const { return phase_; }

    friend bool operator==(const HypocycloidSpec&, const HypocycloidSpec&) = default;

private:
    Point center_{};
    double fixed_radius_ = 3.0;
    int cusps_ = 3;
    double phase_ = 0.0;
};

struct CurveSample {
    std::vector<double> params;
    std::vector<Point> points;
};

namespace detail {

/// Point on the curve before rotation by phase and translation.
inline Point hypocycloid_local(double fixed_radius, int k, double t) {
    const double r = fixed_radius / k;
    const double big = fixed_radius - r;
    const double m = k - 1; // (R - r) / r
    return {big * std::cos(t) + r * std::cos(m * t), big * std::sin(t) - r * std::sin(m * t)};
}

inline Point hypocycloid_local_velocity(double fixed_radius, int k, double t) {
    const double big = fixed_radius - fixed_radius / k;
    const double m = k - 1;
    return {-big * (std::sin(t) + std::sin(m * t)), big * (std::cos(t) - std::cos(m * t))};
}

inline Point hypocycloid_local_acceleration(double fixed_radius, int k, double t) {
    const double big = fixed_radius - fixed_radius / k;
    const double m = k - 1;
    return {-big * (std::cos(t) + m * std::cos(m * t)), big * (-std::sin(t) + m * std::sin(m * t))};
}

} // namespace detail

inline Point hypocycloid_point(const HypocycloidSpec& spec, double t) {
    return spec.center() + rotate(detail::hypocycloid_local(spec.fixed_radius(), spec.cusps(), t), spec.phase());
}

/// d(point)/dt.
inline Point hypocycloid_velocity(const HypocycloidSpec& spec, double t) {
    return rotate(detail::hypocycloid_local_velocity(spec.fixed_radius(), spec.cusps(), t), spec.phase());
}

/// Parameters t_j = 2*pi*j/k; the cusp points sit at polar angles phase + t_j.
inline std::vector<double> cusp_params(const HypocycloidSpec& spec) {
    std::vector<double> out;
    const int k = spec.cusps();
    for (int j = 0; j < k; ++j) out.push_back(kTwoPi * j / k);
    return out;
}

inline CurveSample sample_hypocycloid_at(const HypocycloidSpec& spec, std::span<const double> params) {
    CurveSample s;
    s.params.assign(params.begin(), params.end());
    for (double t : params) s.points.push_back(hypocycloid_point(spec, t));
    return s;
}

/// Uniform grid over [0, 2pi); the closing point is implied, not repeated.
inline CurveSample sample_hypocycloid(const HypocycloidSpec& spec, std::size_t n_samples) {
    if (n_samples < 16)
        throw Error(ErrorCode::TooFewSamples, "hypocycloid sampling needs at least 16 samples");
    std::vector<double> params(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
        params[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n_samples);
    return sample_hypocycloid_at(spec, params);
}

} // namespace simsonlab
