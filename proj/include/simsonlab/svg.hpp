#pragma once

#include "simsonlab/curves.hpp"
#include "simsonlab/envelope.hpp"
#include "simsonlab/scene.hpp"
#include "simsonlab/simson.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simsonlab {

namespace palette {
inline constexpr std::string_view black = "#000000";
inline constexpr std::string_view green = "#2e8b57";
inline constexpr std::string_view blue = "#1f4fd1";
inline constexpr std::string_view orange = "#f28c28";
inline constexpr std::string_view grey = "#9a9a9a";
inline constexpr std::string_view red = "#c0392b";
} // namespace palette

/// Fixed six-decimal formatting, independent of locale. Negative zero prints
/// as zero so mirrored inputs cannot flip a golden byte.
inline std::string fmt6(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    std::string s(buf, res.ptr);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

/// Maps scene coordinates to pixels: `center` lands in the middle of the
/// canvas, y grows upward in the scene and downward on screen.
struct Viewport {
    double width = 800.0;
    double height = 800.0;
    Point center{};
    double px_per_unit = 1.0;

    Point to_px(Point p) const {
        return {0.5 * width + (p.x - center.x) * px_per_unit, 0.5 * height - (p.y - center.y) * px_per_unit};
    }
};

/// Liang-Barsky clip of the pixel segment pq to [0, width] x [0, height].
inline std::optional<std::pair<Point, Point>> clip_segment(Point p, Point q, double width, double height) {
    const double dx = q.x - p.x, dy = q.y - p.y;
    double t0 = 0.0, t1 = 1.0;
    const std::array<std::pair<double, double>, 4> edges{
        {{-dx, p.x}, {dx, width - p.x}, {-dy, p.y}, {dy, height - p.y}}};
    for (const auto& [den, num] : edges) {
        if (den == 0.0) {
            if (num < 0.0) return std::nullopt;
            continue;
        }
        const double t = num / den;
        if (den < 0.0) {
            if (t > t1) return std::nullopt;
            t0 = std::max(t0, t);
        } else {
            if (t < t0) return std::nullopt;
            t1 = std::min(t1, t);
        }
    }
    auto at = [&](double t) {
        return Point{std::clamp(p.x + t * dx, 0.0, width), std::clamp(p.y + t * dy, 0.0, height)};
    };
    return std::pair{at(t0), at(t1)};
}

/// The part of an infinite line visible in the viewport, in pixels.
inline std::optional<std::pair<Point, Point>> clip_line(const Line& l, const Viewport& view) {
    const double reach = std::hypot(view.width, view.height) / view.px_per_unit;
    const Point base = view.center - l.signed_distance(view.center) * l.normal();
    const Point dir = l.direction();
    return clip_segment(view.to_px(base - reach * dir), view.to_px(base + reach * dir), view.width, view.height);
}

struct SvgItem {
    enum class Kind { Polyline, Segment, Circle, Marker, Text };
    Kind kind = Kind::Segment;
    std::vector<Point> points; // pixels
    double radius = 0.0;
    bool closed = false;
    std::string text;
    std::optional<std::string> color; // overrides the group stroke
};

struct SvgGroup {
    std::string id;
    std::string stroke;
    double width = 1.0;
    std::optional<std::string> dasharray;
    std::vector<SvgItem> items;
};

struct RenderDoc {
    Viewport view;
    std::vector<SvgGroup> groups;
};

/// Objects a figure can be assembled from; all optional.
struct RenderArtifacts {
    std::optional<ConstructionTrace> construction;
    std::optional<LineFamily> family;
    std::vector<Line> locus; // extra family lines, e.g. an animation's trail
    std::optional<EnvelopeTrace> envelope;
    std::optional<CurveSample> overlay;
    double frame_extent = 0.0; // smallest half-width to frame, in scene units
};

namespace detail {

struct LayerDefaults {
    std::string_view id;
    std::string_view stroke;
    double width;
    std::string_view dasharray;
};

inline constexpr std::array<LayerDefaults, 11> kLayerOrder{{
    {"circle", palette::black, 1.5, ""},
    {"polygon", palette::green, 2.0, ""},
    {"locus", palette::grey, 0.6, ""},
    {"sides", palette::green, 1.0, ""},
    {"perpendiculars", palette::green, 0.8, ""},
    {"feet", palette::blue, 1.0, ""},
    {"sub_simson_lines", palette::blue, 1.2, ""},
    {"simson_line", palette::blue, 2.0, ""},
    {"probe", palette::black, 1.0, ""},
    {"hypocycloid_overlay", palette::red, 1.5, "8 5"},
    {"envelope", palette::black, 2.0, ""},
}};

inline constexpr double kFootRadius = 4.0;
inline constexpr double kProbeRadius = 5.0;
inline constexpr double kCuspRadius = 3.0;
inline constexpr double kLabelOffset = 16.0;

inline std::string roman(std::size_t i) {
    static constexpr std::array<std::string_view, 12> numerals{"I", "II", "III", "IV", "V", "VI",
                                                               "VII", "VIII", "IX", "X", "XI", "XII"};
    return std::string(numerals.at(i));
}

inline SvgItem segment(Point a, Point b, std::optional<std::string> color = std::nullopt) {
    SvgItem item;
    item.kind = SvgItem::Kind::Segment;
    item.points = {a, b};
    item.color = std::move(color);
    return item;
}

inline SvgItem marker(Point p, double radius, std::optional<std::string> color = std::nullopt) {
    SvgItem item;
    item.kind = SvgItem::Kind::Marker;
    item.points = {p};
    item.radius = radius;
    item.color = std::move(color);
    return item;
}

inline SvgItem label(Point p, std::string text) {
    SvgItem item;
    item.kind = SvgItem::Kind::Text;
    item.points = {p};
    item.text = std::move(text);
    return item;
}

inline SvgItem polyline(const Viewport& view, const std::vector<Point>& pts, bool closed) {
    SvgItem item;
    item.kind = SvgItem::Kind::Polyline;
    item.closed = closed;
    item.points.reserve(pts.size());
    for (const Point& p : pts) {
        const Point q = view.to_px(p);
        item.points.push_back({std::clamp(q.x, 0.0, view.width), std::clamp(q.y, 0.0, view.height)});
    }
    return item;
}

inline void add_line(SvgGroup& g, const Line& l, const Viewport& view, std::optional<std::string> color = std::nullopt) {
    if (const auto s = clip_line(l, view)) g.items.push_back(segment(s->first, s->second, std::move(color)));
}

inline double envelope_extent(const Scene& scene, const RenderArtifacts& art) {
    double extent = std::max(scene.circle.radius(), art.frame_extent);
    const Point c = scene.circle.center();
    if (art.envelope)
        for (const Point& p : art.envelope->points) extent = std::max(extent, distance(p, c));
    if (art.overlay)
        for (const Point& p : art.overlay->points) extent = std::max(extent, distance(p, c));
    return extent;
}

inline void write_attr(std::string& out, std::string_view name, std::string_view value) {
    out += ' ';
    out += name;
    out += "=\"";
    out += value;
    out += '"';
}

} // namespace detail

/// Lays out the figure. Layers are emitted in a fixed order; hidden and empty
/// layers produce no group at all.
inline RenderDoc build_render_doc(const Scene& scene, const RenderArtifacts& art) {
    if (art.construction && !(art.construction->polygon == scene.polygon))
        throw Error(ErrorCode::InconsistentArtifacts, "construction polygon differs from the scene polygon");
    if (art.family && !(art.family->polygon == scene.polygon))
        throw Error(ErrorCode::InconsistentArtifacts, "line family polygon differs from the scene polygon");

    RenderDoc doc;
    Viewport& view = doc.view;
    view.center = scene.circle.center();
    view.px_per_unit = 0.4 * std::min(view.width, view.height) / detail::envelope_extent(scene, art);

    const std::size_t n = scene.polygon.size();
    const std::string top_color(n >= 4 ? palette::orange : palette::blue);

    for (const auto& layer : detail::kLayerOrder) {
        if (!scene.shows(layer.id)) continue;
        SvgGroup g{std::string(layer.id), std::string(layer.stroke), layer.width, std::nullopt, {}};
        if (!layer.dasharray.empty()) g.dasharray = std::string(layer.dasharray);

        if (layer.id == "circle") {
            SvgItem c;
            c.kind = SvgItem::Kind::Circle;
            c.points = {view.to_px(scene.circle.center())};
            c.radius = scene.circle.radius() * view.px_per_unit;
            g.items.push_back(c);
        } else if (layer.id == "polygon") {
            std::vector<Point> vertices;
            for (std::size_t i = 0; i < n; ++i) vertices.push_back(scene.polygon.vertex(i));
            g.items.push_back(detail::polyline(view, vertices, true));
            for (std::size_t i = 0; i < n; ++i) {
                const Point out = rotate({1.0, 0.0}, scene.polygon.angles()[i]);
                const Point at = view.to_px(vertices[i]) + detail::kLabelOffset * Point{out.x, -out.y};
                g.items.push_back(detail::label(at, detail::roman(i)));
            }
        } else if (layer.id == "locus") {
            if (art.family)
                for (const Line& l : art.family->lines) detail::add_line(g, l, view);
            for (const Line& l : art.locus) detail::add_line(g, l, view);
        } else if (layer.id == "probe") {
            if (art.construction) {
                const Point p = view.to_px(art.construction->probe);
                g.items.push_back(detail::marker(p, detail::kProbeRadius));
                const Point out = rotate({1.0, 0.0}, art.construction->theta);
                g.items.push_back(detail::label(p + detail::kLabelOffset * Point{out.x, -out.y}, "P"));
            }
        } else if (layer.id == "hypocycloid_overlay") {
            if (art.overlay) g.items.push_back(detail::polyline(view, art.overlay->points, true));
        } else if (layer.id == "envelope") {
            if (art.envelope) {
                g.items.push_back(detail::polyline(view, art.envelope->points, true));
                for (std::size_t i : art.envelope->cusp_indices)
                    g.items.push_back(detail::marker(view.to_px(art.envelope->points[i]), detail::kCuspRadius));
            }
        } else if (art.construction) {
            for (const ConstructionStep& step : art.construction->steps) {
                if (step.layer != layer.id) continue;
                const bool top = step.level == n && n >= 4;
                switch (step.kind) {
                case StepKind::SideLine: detail::add_line(g, step.line, view); break;
                case StepKind::Perpendicular:
                    if (const auto s = clip_segment(view.to_px(step.from), view.to_px(step.point), view.width,
                                                    view.height))
                        g.items.push_back(detail::segment(s->first, s->second));
                    break;
                case StepKind::Foot:
                    g.items.push_back(detail::marker(view.to_px(step.point), detail::kFootRadius,
                                                     top ? std::optional<std::string>(top_color) : std::nullopt));
                    break;
                case StepKind::SimsonLine:
                    detail::add_line(g, step.line, view, top ? std::optional<std::string>(top_color) : std::nullopt);
                    break;
                }
            }
            if (layer.id == "simson_line") g.stroke = top_color;
        }

        if (const auto it = scene.styles.find(layer.id); it != scene.styles.end()) {
            const LayerStyle& style = it->second;
            if (style.stroke) {
                g.stroke = *style.stroke;
                for (SvgItem& item : g.items) item.color.reset();
            }
            if (style.width) g.width = *style.width;
            if (style.dasharray) {
                if (*style.dasharray == "none") g.dasharray.reset();
                else g.dasharray = *style.dasharray;
            }
        }
        if (!g.items.empty()) doc.groups.push_back(std::move(g));
    }
    return doc;
}

/// SVG 1.1 text. Every coordinate goes through fmt6, so equal documents give
/// equal bytes.
inline std::string to_svg(const RenderDoc& doc) {
    const Viewport& v = doc.view;
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"";
    detail::write_attr(out, "width", fmt6(v.width));
    detail::write_attr(out, "height", fmt6(v.height));
    detail::write_attr(out, "viewBox", "0 0 " + fmt6(v.width) + " " + fmt6(v.height));
    out += ">\n";
    out += "  <rect x=\"0\" y=\"0\"";
    detail::write_attr(out, "width", fmt6(v.width));
    detail::write_attr(out, "height", fmt6(v.height));
    out += " fill=\"#ffffff\"/>\n";

    for (const SvgGroup& g : doc.groups) {
        out += "  <g";
        detail::write_attr(out, "id", g.id);
        out += " fill=\"none\"";
        detail::write_attr(out, "stroke", g.stroke);
        detail::write_attr(out, "stroke-width", fmt6(g.width));
        if (g.dasharray) detail::write_attr(out, "stroke-dasharray", *g.dasharray);
        out += " stroke-linecap=\"round\" stroke-linejoin=\"round\">\n";
        for (const SvgItem& item : g.items) {
            const std::string& color = item.color ? *item.color : g.stroke;
            switch (item.kind) {
            case SvgItem::Kind::Segment:
                out += "    <line";
                detail::write_attr(out, "x1", fmt6(item.points[0].x));
                detail::write_attr(out, "y1", fmt6(item.points[0].y));
                detail::write_attr(out, "x2", fmt6(item.points[1].x));
                detail::write_attr(out, "y2", fmt6(item.points[1].y));
                if (item.color) detail::write_attr(out, "stroke", color);
                out += "/>\n";
                break;
            case SvgItem::Kind::Polyline: {
                std::string pts;
                auto add = [&](Point p) {
                    if (!pts.empty()) pts += ' ';
                    pts += fmt6(p.x) + "," + fmt6(p.y);
                };
                for (const Point& p : item.points) add(p);
                if (item.closed && !item.points.empty()) add(item.points.front());
                out += "    <polyline";
                detail::write_attr(out, "points", pts);
                if (item.color) detail::write_attr(out, "stroke", color);
                out += "/>\n";
                break;
            }
            case SvgItem::Kind::Circle:
                out += "    <circle";
                detail::write_attr(out, "cx", fmt6(item.points[0].x));
                detail::write_attr(out, "cy", fmt6(item.points[0].y));
                detail::write_attr(out, "r", fmt6(item.radius));
                if (item.color) detail::write_attr(out, "stroke", color);
                out += "/>\n";
                break;
            case SvgItem::Kind::Marker:
                out += "    <circle";
                detail::write_attr(out, "cx", fmt6(item.points[0].x));
                detail::write_attr(out, "cy", fmt6(item.points[0].y));
                detail::write_attr(out, "r", fmt6(item.radius));
                detail::write_attr(out, "fill", color);
                out += " stroke=\"none\"/>\n";
                break;
            case SvgItem::Kind::Text:
                out += "    <text";
                detail::write_attr(out, "x", fmt6(item.points[0].x));
                detail::write_attr(out, "y", fmt6(item.points[0].y));
                out += " font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\""
                       " dominant-baseline=\"middle\"";
                detail::write_attr(out, "fill", color);
                out += " stroke=\"none\">";
                out += item.text;
                out += "</text>\n";
                break;
            }
        }
        out += "  </g>\n";
    }
    out += "</svg>\n";
    return out;
}

inline std::string render_svg(const Scene& scene, const RenderArtifacts& art) {
    return to_svg(build_render_doc(scene, art));
}

} // namespace simsonlab
