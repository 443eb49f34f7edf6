#pragma once

#include "simsonlab/fitting.hpp"
#include "simsonlab/scene.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

namespace simsonlab {

inline constexpr int kReportSchemaVersion = 1;

/// Rounds to 12 significant digits. Idempotent, so canonical text survives
/// a parse and rewrite unchanged.
inline double round_sig12(double v) {
    if (v == 0.0) return 0.0;
    if (!std::isfinite(v)) return v;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 11);
    double out = 0.0;
    std::from_chars(buf, res.ptr, out);
    return out;
}

/// Rounds every float in the tree; non-finite values become null.
inline nlohmann::json canonicalize(const nlohmann::json& v) {
    using nlohmann::json;
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::isfinite(d) ? json(round_sig12(d)) : json(nullptr);
    }
    if (v.is_array()) {
        json out = json::array();
        for (const auto& e : v) out.push_back(canonicalize(e));
        return out;
    }
    if (v.is_object()) {
        json out = json::object();
        for (const auto& [key, e] : v.items()) out[key] = canonicalize(e);
        return out;
    }
    return v;
}

/// Sorted keys (nlohmann objects are ordered maps), two-space indent,
/// trailing newline.
inline std::string canonical_dump(const nlohmann::json& v) { return canonicalize(v).dump(2) + "\n"; }

inline nlohmann::json report_to_json(const FitReport& r) {
    using nlohmann::json;
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["spec"] = {{"center", detail::point_json(r.spec.center())},
                 {"fixed_radius", r.spec.fixed_radius()},
                 {"cusps", r.spec.cusps()},
                 {"phase", r.spec.phase()}};
    j["rms"] = r.rms;
    j["max_dev"] = r.max_dev;
    j["n_cusps_detected"] = r.n_cusps_detected;
    j["expected_cusps"] = r.expected_cusps;
    j["passed"] = r.passed;
    j["reason"] = std::string(to_string(r.reason));
    j["notes"] = r.notes;
    j["tolerance"] = r.tolerance;
    j["trace"] = {{"samples", r.trace.samples}, {"points", r.trace.points}, {"dropped", r.trace.dropped}};
    if (r.circle)
        j["circle"] = {{"center", detail::point_json(r.circle->center())}, {"radius", r.circle->radius()}};
    if (r.center_offset) j["center_offset"] = *r.center_offset;
    return j;
}

inline std::string write_report(const FitReport& r) { return canonical_dump(report_to_json(r)); }

inline FitReason fit_reason_from_string(std::string_view s) {
    for (FitReason r : {FitReason::Ok, FitReason::NotEnoughCusps, FitReason::CuspCountMismatch,
                        FitReason::MaxDevExceeded})
        if (to_string(r) == s) return r;
    throw Error(ErrorCode::SchemaError, "unknown reason code", "reason");
}

/// Reads a report written by write_report.
inline FitReport report_from_json(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed JSON: ") + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != kReportSchemaVersion)
            throw Error(ErrorCode::RangeError, "unsupported schema version", "schema_version");
        FitReport r;
        const json& s = j.at("spec");
        r.spec = HypocycloidSpec(detail::expect_point(s.at("center"), "spec.center"), s.at("fixed_radius").get<double>(),
                                 s.at("cusps").get<int>(), s.at("phase").get<double>());
        r.rms = j.at("rms").get<double>();
        r.max_dev = j.at("max_dev").get<double>();
        r.n_cusps_detected = j.at("n_cusps_detected").get<int>();
        r.expected_cusps = j.at("expected_cusps").get<int>();
        r.passed = j.at("passed").get<bool>();
        r.reason = fit_reason_from_string(j.at("reason").get<std::string>());
        r.notes = j.at("notes").get<std::string>();
        r.tolerance = j.at("tolerance").get<double>();
        const json& t = j.at("trace");
        r.trace = {t.at("samples").get<std::size_t>(), t.at("points").get<std::size_t>(),
                   t.at("dropped").get<std::size_t>()};
        if (j.contains("circle"))
            r.circle = Circle(detail::expect_point(j["circle"].at("center"), "circle.center"),
                              j["circle"].at("radius").get<double>());
        if (j.contains("center_offset")) r.center_offset = j["center_offset"].get<double>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("bad report: ") + e.what());
    }
}

} // namespace simsonlab
