#pragma once

#include "simsonlab/curves.hpp"
#include "simsonlab/envelope.hpp"
#include "simsonlab/fitting.hpp"
#include "simsonlab/report.hpp"
#include "simsonlab/scene.hpp"
#include "simsonlab/svg.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

// Pipelines shared by the command-line tool, the HTTP protocol and the
// golden-figure tests, so all three produce the same bytes.
namespace simsonlab::app {

inline constexpr std::size_t kDefaultEnvelopeSamples = 720;
inline constexpr std::size_t kDefaultVerifySamples = 1440;
inline constexpr std::size_t kOverlaySamples = 720;

/// "regular:<n>" or "regular:<n>:<phase>"; nullopt when `source` is not in
/// that form.
inline std::optional<Scene> parse_shorthand(std::string_view source) {
    constexpr std::string_view prefix = "regular:";
    if (source.substr(0, prefix.size()) != prefix) return std::nullopt;
    std::string_view rest = source.substr(prefix.size());
    const auto colon = rest.find(':');
    const std::string_view n_text = rest.substr(0, colon);
    int n = 0;
    const auto [n_end, n_err] = std::from_chars(n_text.data(), n_text.data() + n_text.size(), n);
    if (n_err != std::errc{} || n_end != n_text.data() + n_text.size() || n_text.empty())
        throw Error(ErrorCode::SchemaError, "expected regular:<n>[:phase]", "scene");
    double phase = std::numbers::pi / 2;
    if (colon != std::string_view::npos) {
        const std::string_view p_text = rest.substr(colon + 1);
        const auto [p_end, p_err] = std::from_chars(p_text.data(), p_text.data() + p_text.size(), phase);
        if (p_err != std::errc{} || p_end != p_text.data() + p_text.size() || p_text.empty() || !std::isfinite(phase))
            throw Error(ErrorCode::SchemaError, "phase must be a number", "scene");
    }
    return regular_scene(n, phase);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read file " + path, "scene");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A scene from the shorthand or from a JSON file path.
inline Scene load_scene(const std::string& source) {
    if (auto s = parse_shorthand(source)) return *s;
    return parse_scene(read_text_file(source));
}

/// The k-cusped hypocycloid inscribed in the scene circle with a cusp at the
/// first vertex, k = number of vertices.
inline HypocycloidSpec nominal_hypocycloid(const Scene& scene) {
    return HypocycloidSpec(scene.circle.center(), scene.circle.radius(), static_cast<int>(scene.polygon.size()),
                           scene.polygon.angles().front());
}

inline constexpr std::array<std::string_view, 5> kConstructionLayers{"sides", "perpendiculars", "feet",
                                                                    "sub_simson_lines", "simson_line"};

/// Construction figure at `theta`, with an optional accumulated locus. With
/// every construction layer hidden the probe is dropped too, which leaves a
/// bare curve figure when the overlay is on.
inline std::string render_construction(const Scene& scene, double theta, std::vector<Line> locus = {},
                                       double frame_extent = 0.0) {
    RenderArtifacts art;
    art.frame_extent = frame_extent;
    bool any = false;
    for (std::string_view layer : kConstructionLayers) any = any || scene.shows(layer);
    if (any) art.construction = construction_trace(scene.polygon, {theta});
    art.locus = std::move(locus);
    if (scene.shows("hypocycloid_overlay")) art.overlay = sample_hypocycloid(nominal_hypocycloid(scene), kOverlaySamples);
    return render_svg(scene, art);
}

struct EnvelopeFigure {
    LineFamily family;
    EnvelopeTrace trace;
    std::optional<FitReport> fit;
    std::string svg;
};

/// Line family with scene.samples lines, envelope extracted on a separate
/// grid of `envelope_samples`, fitted overlay when the layer is on.
inline EnvelopeFigure render_envelope(const Scene& scene, std::size_t envelope_samples = kDefaultEnvelopeSamples) {
    EnvelopeFigure fig{build_family(scene.polygon, scene.samples), {}, std::nullopt, {}};
    fig.trace = envelope_samples == scene.samples ? envelope_points(fig.family)
                                                  : envelope_points(build_family(scene.polygon, envelope_samples));
    RenderArtifacts art;
    art.family = fig.family;
    art.envelope = fig.trace;
    if (scene.shows("hypocycloid_overlay") && fig.trace.points.size() >= fit_tol::min_trace_points) {
        fig.fit = fit_hypocycloid(fig.trace, static_cast<int>(scene.polygon.size()));
        if (fig.fit->n_cusps_detected >= 3) art.overlay = sample_hypocycloid(fig.fit->spec, kOverlaySamples);
    }
    fig.svg = render_svg(scene, art);
    return fig;
}

/// Farthest envelope point from the circle center, on the default envelope
/// grid. Animation frames use it so the growing trail is framed like the
/// envelope figure.
inline double envelope_frame_extent(const Scene& scene) {
    const EnvelopeTrace trace = envelope_points(build_family(scene.polygon, kDefaultEnvelopeSamples));
    double extent = 0.0;
    for (const Point& p : trace.points) extent = std::max(extent, distance(p, scene.circle.center()));
    return extent;
}

/// Probe angles of an animation: the display family's grid, so the final
/// trail is exactly that family.
inline std::vector<double> animation_thetas(const Scene& scene, std::size_t frames) {
    std::vector<double> t(frames);
    for (std::size_t i = 0; i < frames; ++i) t[i] = family_theta(scene.polygon, i, frames);
    return t;
}

/// Frame file name, 1-based and zero-padded to at least four digits.
inline std::string frame_name(std::size_t index, std::size_t frames) {
    std::size_t digits = 4;
    for (std::size_t f = frames; f >= 10000; f /= 10) ++digits;
    std::string num = std::to_string(index + 1);
    return "frame_" + std::string(digits - std::min(digits, num.size()), '0') + num + ".svg";
}

inline FitReport verify_scene(const Scene& scene, std::size_t n_samples, std::optional<int> expected = std::nullopt,
                              const TraceHook& hook = {}) {
    const int k = expected.value_or(static_cast<int>(scene.polygon.size()));
    if (scene.polygon.size() == 3 && k == 3 && !hook) return scalene_report(scene.polygon, n_samples);
    return verify_claim(scene.polygon, k, n_samples, hook);
}

inline nlohmann::json trace_to_json(const EnvelopeTrace& trace) {
    using nlohmann::json;
    json points = json::array();
    for (const Point& p : trace.points) points.push_back(detail::point_json(p));
    json cusps = json::array();
    for (const Cusp& c : detect_cusps(trace))
        cusps.push_back({{"theta", c.theta}, {"point", detail::point_json(c.point)}, {"index", c.index}});
    return {{"thetas", trace.thetas}, {"points", points}, {"speeds", trace.speeds},
            {"cusps", cusps},         {"dropped", trace.dropped}};
}

} // namespace simsonlab::app
