#pragma once

#include "simsonlab/app.hpp"
#include "simsonlab/report.hpp"
#include "simsonlab/scene.hpp"

#include <json.hpp>

#include <array>
#include <string>
#include <string_view>

// Kernel protocol behind `serve`: one stateless request/response per call,
// JSON in, canonical JSON out. Kept free of any transport so it can be tested
// directly.
namespace simsonlab::protocol {

inline constexpr std::array<std::string_view, 4> kOps{"simson", "envelope", "verify", "render"};

struct Response {
    int status = 200;
    std::string body;
};

namespace detail {

using nlohmann::json;
using simsonlab::detail::expect_integer;
using simsonlab::detail::expect_number;
using simsonlab::detail::point_json;

inline json line_json(const Line& l) { return {{"a", l.a}, {"b", l.b}, {"c", l.c}}; }

inline Response error_response(int status, std::string_view code, std::string_view path, std::string_view message) {
    json body;
    body["error"] = {{"code", code}, {"path", path}, {"message", message}};
    return {status, canonical_dump(body)};
}

inline std::size_t sample_count(const json& req, std::string_view key, std::size_t fallback) {
    if (!req.contains(key)) return fallback;
    const long long s = expect_integer(req[std::string(key)], key);
    if (s < static_cast<long long>(envelope_tol::min_family) || s > static_cast<long long>(kMaxSceneSamples))
        throw Error(ErrorCode::RangeError, "samples must be between 32 and 1000000", std::string(key));
    return static_cast<std::size_t>(s);
}

inline json simson_body(const Scene& scene, const json& req) {
    const double theta = req.contains("theta") ? expect_number(req["theta"], "theta") : scene.probe_theta;
    const ConstructionTrace trace = construction_trace(scene.polygon, {theta});
    json feet = json::array();
    for (const Point& f : trace.result.feet) feet.push_back(point_json(f));
    json steps = json::array();
    for (const ConstructionStep& s : trace.steps) {
        json step = {{"kind", to_string(s.kind)}, {"layer", s.layer}, {"level", s.level}, {"mask", s.mask}};
        if (s.kind == StepKind::Foot) {
            step["point"] = point_json(s.point);
        } else {
            step["line"] = line_json(s.line);
        }
        if (s.kind == StepKind::Perpendicular) {
            step["from"] = point_json(s.from);
            step["point"] = point_json(s.point);
        }
        steps.push_back(std::move(step));
    }
    return {{"theta", theta},
            {"probe", point_json(trace.probe)},
            {"line", line_json(trace.result.line)},
            {"feet", feet},
            {"residual", {{"max_abs", trace.result.residual.max_abs}, {"which", trace.result.residual.which}}},
            {"tolerance", collinearity_tol(scene.polygon.size()) * scene.polygon.scale()},
            {"degenerate", trace.result.degenerate},
            {"steps", steps}};
}

inline std::optional<int> expected_cusps(const json& req) {
    if (!req.contains("expected_cusps")) return std::nullopt;
    const long long k = expect_integer(req["expected_cusps"], "expected_cusps");
    if (k < 3 || k > 64) throw Error(ErrorCode::RangeError, "expected_cusps must be between 3 and 64", "expected_cusps");
    return static_cast<int>(k);
}

inline json envelope_body(const Scene& scene, const json& req) {
    const std::size_t samples = sample_count(req, "samples", app::kDefaultEnvelopeSamples);
    const LineFamily family = build_family(scene.polygon, samples);
    const EnvelopeTrace trace = envelope_points(family);
    json out = {{"samples", samples}, {"trace", app::trace_to_json(trace)}};
    const int k = expected_cusps(req).value_or(static_cast<int>(scene.polygon.size()));
    if (trace.points.size() >= fit_tol::min_trace_points) {
        FitReport fit = fit_hypocycloid(trace, k);
        fit.trace.samples = samples;
        out["fit"] = report_to_json(fit);
    }
    return out;
}

inline json verify_body(const Scene& scene, const json& req) {
    const std::size_t samples = sample_count(req, "samples", app::kDefaultVerifySamples);
    return report_to_json(app::verify_scene(scene, samples, expected_cusps(req)));
}

inline json render_body(const Scene& scene, const json& req) {
    const std::string figure = req.contains("figure") ? req["figure"].get<std::string>() : "construction";
    if (figure == "construction") {
        const double theta = req.contains("theta") ? expect_number(req["theta"], "theta") : scene.probe_theta;
        return {{"figure", figure}, {"svg", app::render_construction(scene, theta)}};
    }
    if (figure == "envelope") {
        const std::size_t samples = sample_count(req, "envelope_samples", app::kDefaultEnvelopeSamples);
        return {{"figure", figure}, {"svg", app::render_envelope(scene, samples).svg}};
    }
    throw Error(ErrorCode::RangeError, "figure must be \"construction\" or \"envelope\"", "figure");
}

} // namespace detail

/// Handles one request. `op` comes from the route; an "op" field in the body
/// must agree with it, and routes without an op take it from the body.
inline Response handle_request(std::string_view op, std::string_view body) {
    using nlohmann::json;
    json req;
    try {
        req = json::parse(body);
    } catch (const json::parse_error& e) {
        return detail::error_response(400, "SchemaError", "", std::string("malformed JSON: ") + e.what());
    }
    try {
        if (!req.is_object()) throw Error(ErrorCode::SchemaError, "request must be an object");
        simsonlab::detail::reject_unknown(req, "",
                                          {"op", "scene", "theta", "samples", "expected_cusps", "figure", "envelope_samples"});
        std::string resolved(op);
        if (req.contains("op")) {
            if (!req["op"].is_string()) throw Error(ErrorCode::SchemaError, "expected a string", "op");
            const auto body_op = req["op"].get<std::string>();
            if (!resolved.empty() && body_op != resolved)
                throw Error(ErrorCode::SchemaError, "op does not match the endpoint", "op");
            resolved = body_op;
        }
        if (req.contains("figure") && !req["figure"].is_string())
            throw Error(ErrorCode::SchemaError, "expected a string", "figure");
        bool known = false;
        for (std::string_view o : kOps) known = known || o == resolved;
        if (!known) return detail::error_response(404, "UnknownOp", "op", "unknown op '" + resolved + "'");

        const Scene scene = [&] {
            try {
                return scene_from_json(simsonlab::detail::require(req, "scene", ""));
            } catch (const Error& e) {
                if (e.path().empty() || e.path() == "scene") throw;
                const std::string what = e.what();
                const auto colon = what.find(": ");
                throw Error(e.code(), colon == std::string::npos ? what : what.substr(colon + 2), "scene." + e.path());
            }
        }();
        json out;
        if (resolved == "simson") out = detail::simson_body(scene, req);
        else if (resolved == "envelope") out = detail::envelope_body(scene, req);
        else if (resolved == "verify") out = detail::verify_body(scene, req);
        else out = detail::render_body(scene, req);
        out["op"] = resolved;
        out["schema_version"] = kSceneSchemaVersion;
        return {200, canonical_dump(out)};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InconsistentArtifacts)
            return detail::error_response(500, "InternalError", e.path(), e.what());
        return detail::error_response(400, to_string(e.code()), e.path(), e.what());
    } catch (const std::exception& e) {
        return detail::error_response(500, "InternalError", "", e.what());
    }
}

} // namespace simsonlab::protocol
