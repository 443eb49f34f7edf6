#pragma once

#include "simsonlab/geometry.hpp"
#include "simsonlab/simson.hpp"

#include <json.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simsonlab {

inline constexpr int kSceneSchemaVersion = 1;
inline constexpr std::size_t kMinSceneSamples = 32;
inline constexpr std::size_t kMaxSceneSamples = 1'000'000;

/// Display toggles, in the order the layers are drawn.
inline constexpr std::array<std::string_view, 8> kToggleLayers{
    "polygon", "sides", "perpendiculars", "feet", "sub_simson_lines", "simson_line", "envelope", "hypocycloid_overlay"};

/// Every layer that accepts a style override (toggles plus always-on layers).
inline constexpr std::array<std::string_view, 11> kStyleLayers{
    "circle", "polygon", "sides", "perpendiculars", "feet", "sub_simson_lines",
    "simson_line", "probe", "locus", "hypocycloid_overlay", "envelope"};

struct LayerStyle {
    std::optional<std::string> stroke;
    std::optional<double> width;
    std::optional<std::string> dasharray;

    friend bool operator==(const LayerStyle&, const LayerStyle&) = default;
};

struct PolygonSource {
    enum class Kind { Regular, Angles };
    Kind kind = Kind::Regular;
    int n = 3;
    double phase = std::numbers::pi / 2;
    std::vector<double> values; // Angles only

    friend bool operator==(const PolygonSource&, const PolygonSource&) = default;
};

struct Scene {
    Circle circle;
    PolygonSource source;
    InscribedPolygon polygon = InscribedPolygon::regular(Circle{}, 3, std::numbers::pi / 2);
    double probe_theta = 0.0;
    std::size_t samples = 100;
    std::map<std::string, bool, std::less<>> display;
    std::map<std::string, LayerStyle, std::less<>> styles;

    Scene() {
        for (std::string_view layer : kToggleLayers) display.emplace(layer, layer != "hypocycloid_overlay");
    }

    bool shows(std::string_view layer) const {
        const auto it = display.find(layer);
        return it == display.end() || it->second;
    }

    friend bool operator==(const Scene&, const Scene&) = default;
};

namespace detail {

using nlohmann::json;

inline std::string join_path(std::string_view parent, std::string_view key) {
    return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

inline void reject_unknown(const json& obj, std::string_view path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed) known = known || key == a;
        if (!known) throw Error(ErrorCode::SchemaError, "unknown field", join_path(path, key));
    }
}

inline const json& require(const json& obj, std::string_view key, std::string_view path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCode::SchemaError, "missing required field", join_path(path, key));
    return *it;
}

inline const json& expect_object(const json& v, std::string_view path) {
    if (!v.is_object()) throw Error(ErrorCode::SchemaError, "expected an object", std::string(path));
    return v;
}

inline double expect_number(const json& v, std::string_view path) {
    if (!v.is_number()) throw Error(ErrorCode::SchemaError, "expected a number", std::string(path));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::RangeError, "expected a finite number", std::string(path));
    return d;
}

inline long long expect_integer(const json& v, std::string_view path) {
    if (!v.is_number_integer()) throw Error(ErrorCode::SchemaError, "expected an integer", std::string(path));
    return v.get<long long>();
}

inline Point expect_point(const json& v, std::string_view path) {
    if (!v.is_array() || v.size() != 2)
        throw Error(ErrorCode::SchemaError, "expected [x, y]", std::string(path));
    return {expect_number(v[0], join_path(path, "0")), expect_number(v[1], join_path(path, "1"))};
}

inline Circle parse_circle(const json& v) {
    expect_object(v, "circle");
    reject_unknown(v, "circle", {"center", "radius"});
    const Point center = v.contains("center") ? expect_point(v["center"], "circle.center") : Point{0.0, 0.0};
    const double radius = v.contains("radius") ? expect_number(v["radius"], "circle.radius") : 1.0;
    if (!(radius > 0.0)) throw Error(ErrorCode::RangeError, "radius must be positive", "circle.radius");
    return Circle(center, radius);
}

inline PolygonSource parse_polygon(const json& v) {
    expect_object(v, "polygon");
    const json& kind = require(v, "kind", "polygon");
    if (!kind.is_string()) throw Error(ErrorCode::SchemaError, "expected a string", "polygon.kind");
    PolygonSource src;
    if (kind == "regular") {
        reject_unknown(v, "polygon", {"kind", "n", "phase"});
        src.kind = PolygonSource::Kind::Regular;
        const long long n = expect_integer(require(v, "n", "polygon"), "polygon.n");
        if (n < 3 || n > static_cast<long long>(kMaxPolygonVertices))
            throw Error(ErrorCode::RangeError, "n must be between 3 and 12", "polygon.n");
        src.n = static_cast<int>(n);
        if (v.contains("phase")) src.phase = expect_number(v["phase"], "polygon.phase");
    } else if (kind == "angles") {
        reject_unknown(v, "polygon", {"kind", "values"});
        src.kind = PolygonSource::Kind::Angles;
        const json& values = require(v, "values", "polygon");
        if (!values.is_array()) throw Error(ErrorCode::SchemaError, "expected an array", "polygon.values");
        if (values.size() < 3 || values.size() > kMaxPolygonVertices)
            throw Error(ErrorCode::RangeError, "polygon needs between 3 and 12 angles", "polygon.values");
        for (std::size_t i = 0; i < values.size(); ++i)
            src.values.push_back(expect_number(values[i], "polygon.values." + std::to_string(i)));
        src.n = static_cast<int>(src.values.size());
    } else {
        throw Error(ErrorCode::SchemaError, "kind must be \"regular\" or \"angles\"", "polygon.kind");
    }
    return src;
}

inline InscribedPolygon resolve_polygon(const Circle& circle, const PolygonSource& src) {
    try {
        if (src.kind == PolygonSource::Kind::Regular)
            return InscribedPolygon::regular(circle, static_cast<std::size_t>(src.n), src.phase);
        return InscribedPolygon::from_angles(circle, src.values);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError || e.code() == ErrorCode::RangeError) throw;
        throw Error(ErrorCode::RangeError, e.what(),
                    src.kind == PolygonSource::Kind::Regular ? "polygon.n" : "polygon.values");
    }
}

inline LayerStyle parse_style(const json& v, const std::string& path) {
    expect_object(v, path);
    reject_unknown(v, path, {"stroke", "width", "dasharray"});
    LayerStyle style;
    if (v.contains("stroke")) {
        if (!v["stroke"].is_string()) throw Error(ErrorCode::SchemaError, "expected a string", path + ".stroke");
        const auto s = v["stroke"].get<std::string>();
        // Colors are written straight into the SVG; keep them to a safe alphabet.
        for (char c : s) {
            const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '#' || c == '(' || c == ')' ||
                            c == ',' || c == '.' || c == ' ' || c == '%';
            if (!ok) throw Error(ErrorCode::SchemaError, "unsupported character in color", path + ".stroke");
        }
        style.stroke = s;
    }
    if (v.contains("width")) {
        const double w = expect_number(v["width"], path + ".width");
        if (!(w > 0.0)) throw Error(ErrorCode::RangeError, "width must be positive", path + ".width");
        style.width = w;
    }
    if (v.contains("dasharray")) {
        if (!v["dasharray"].is_string())
            throw Error(ErrorCode::SchemaError, "expected a string", path + ".dasharray");
        const auto s = v["dasharray"].get<std::string>();
        for (char c : s) {
            const bool ok = std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == ',' || c == ' ' ||
                            std::isalpha(static_cast<unsigned char>(c));
            if (!ok) throw Error(ErrorCode::SchemaError, "unsupported character in dasharray", path + ".dasharray");
        }
        style.dasharray = s;
    }
    return style;
}

inline json point_json(Point p) { return json::array({p.x, p.y}); }

} // namespace detail

inline Scene scene_from_json(const nlohmann::json& root) {
    using detail::expect_number;
    detail::expect_object(root, "");
    detail::reject_unknown(root, "",
                           {"schema_version", "circle", "polygon", "probe_theta", "display", "samples", "styles"});
    if (root.contains("schema_version")) {
        const long long v = detail::expect_integer(root["schema_version"], "schema_version");
        if (v != kSceneSchemaVersion) throw Error(ErrorCode::RangeError, "unsupported schema version", "schema_version");
    }

    Scene scene;
    if (root.contains("circle")) scene.circle = detail::parse_circle(root["circle"]);
    scene.source = detail::parse_polygon(detail::require(root, "polygon", ""));
    scene.polygon = detail::resolve_polygon(scene.circle, scene.source);
    if (root.contains("probe_theta")) scene.probe_theta = expect_number(root["probe_theta"], "probe_theta");
    if (root.contains("samples")) {
        const long long s = detail::expect_integer(root["samples"], "samples");
        if (s < static_cast<long long>(kMinSceneSamples))
            throw Error(ErrorCode::RangeError, "samples must be at least 32", "samples");
        if (s > static_cast<long long>(kMaxSceneSamples))
            throw Error(ErrorCode::RangeError, "samples must be at most 1000000", "samples");
        scene.samples = static_cast<std::size_t>(s);
    }
    if (root.contains("display")) {
        const auto& d = detail::expect_object(root["display"], "display");
        for (const auto& [key, value] : d.items()) {
            const std::string path = "display." + key;
            if (scene.display.find(key) == scene.display.end())
                throw Error(ErrorCode::SchemaError, "unknown field", path);
            if (!value.is_boolean()) throw Error(ErrorCode::SchemaError, "expected a boolean", path);
            scene.display[key] = value.get<bool>();
        }
    }
    if (root.contains("styles")) {
        const auto& s = detail::expect_object(root["styles"], "styles");
        for (const auto& [key, value] : s.items()) {
            const std::string path = "styles." + key;
            bool known = false;
            for (std::string_view layer : kStyleLayers) known = known || key == layer;
            if (!known) throw Error(ErrorCode::SchemaError, "unknown field", path);
            scene.styles[key] = detail::parse_style(value, path);
        }
    }
    return scene;
}

inline Scene parse_scene(std::string_view text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed JSON: ") + e.what());
    }
    return scene_from_json(root);
}

inline nlohmann::json scene_to_json(const Scene& scene) {
    using nlohmann::json;
    json root;
    root["schema_version"] = kSceneSchemaVersion;
    root["circle"] = {{"center", detail::point_json(scene.circle.center())}, {"radius", scene.circle.radius()}};
    if (scene.source.kind == PolygonSource::Kind::Regular) {
        root["polygon"] = {{"kind", "regular"}, {"n", scene.source.n}, {"phase", scene.source.phase}};
    } else {
        root["polygon"] = {{"kind", "angles"}, {"values", scene.source.values}};
    }
    root["probe_theta"] = scene.probe_theta;
    root["samples"] = scene.samples;
    json display = json::object();
    for (const auto& [layer, on] : scene.display) display[layer] = on;
    root["display"] = display;
    if (!scene.styles.empty()) {
        json styles = json::object();
        for (const auto& [layer, style] : scene.styles) {
            json s = json::object();
            if (style.stroke) s["stroke"] = *style.stroke;
            if (style.width) s["width"] = *style.width;
            if (style.dasharray) s["dasharray"] = *style.dasharray;
            styles[layer] = s;
        }
        root["styles"] = styles;
    }
    return root;
}

inline std::string serialize_scene(const Scene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

/// Scene for the "regular:<n>[:phase]" shorthand: unit circle, default
/// phase pi/2 (first vertex at the top).
inline Scene regular_scene(int n, double phase = std::numbers::pi / 2) {
    if (n < 3 || n > static_cast<int>(kMaxPolygonVertices))
        throw Error(ErrorCode::RangeError, "n must be between 3 and 12", "polygon.n");
    Scene scene;
    scene.source = {PolygonSource::Kind::Regular, n, phase, {}};
    scene.polygon = detail::resolve_polygon(scene.circle, scene.source);
    return scene;
}

} // namespace simsonlab
