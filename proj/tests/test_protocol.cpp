#include "simsonlab/protocol.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace simsonlab;
using nlohmann::json;

namespace {
const json kTriangle = {{"polygon", {{"kind", "regular"}, {"n", 3}}}};

json call(std::string_view op, const json& body, int expected_status = 200) {
    const auto r = protocol::handle_request(op, body.dump());
    EXPECT_EQ(r.status, expected_status) << r.body;
    return json::parse(r.body);
}
} // namespace

TEST(Protocol, simson_matches_kernel) {
    const json out = call("simson", {{"scene", kTriangle}, {"theta", 0.7}});
    const auto expected = simson_line_polygon(regular_scene(3).polygon, {0.7});
    EXPECT_EQ(out["op"], "simson");
    EXPECT_NEAR(out["line"]["a"].get<double>(), expected.line.a, 1e-11);
    EXPECT_NEAR(out["line"]["c"].get<double>(), expected.line.c, 1e-11);
    ASSERT_EQ(out["feet"].size(), 3u);
    EXPECT_NEAR(out["feet"][2][0].get<double>(), expected.feet[2].x, 1e-11);
    EXPECT_EQ(out["steps"].size(), 10u);
    EXPECT_EQ(out["degenerate"], false);
}

TEST(Protocol, simson_flags_vertex_probe) {
    const json out = call("simson", {{"scene", kTriangle}, {"theta", std::numbers::pi / 2}});
    EXPECT_EQ(out["degenerate"], true);
}

TEST(Protocol, envelope_returns_trace_and_fit) {
    const json out = call("envelope", {{"scene", {{"polygon", {{"kind", "regular"}, {"n", 4}}}}}, {"samples", 360}});
    EXPECT_EQ(out["trace"]["points"].size(), 360u);
    EXPECT_EQ(out["trace"]["cusps"].size(), 4u);
    EXPECT_EQ(out["fit"]["passed"], true);
    EXPECT_EQ(out["fit"]["n_cusps_detected"], 4);
}

TEST(Protocol, verify_via_generic_route) {
    const json out = call("", {{"op", "verify"}, {"scene", kTriangle}, {"samples", 720}});
    EXPECT_EQ(out["op"], "verify");
    EXPECT_EQ(out["passed"], true);
    EXPECT_EQ(out["n_cusps_detected"], 3);
}

TEST(Protocol, render_returns_svg) {
    const json out = call("render", {{"scene", kTriangle}, {"theta", 0.7}});
    const std::string svg = out["svg"];
    EXPECT_EQ(svg, app::render_construction(regular_scene(3), 0.7));
}

TEST(Protocol, malformed_body_is_400_with_path) {
    const auto r = protocol::handle_request("simson", "{oops");
    EXPECT_EQ(r.status, 400);
    const json bad_n = call("simson", {{"scene", {{"polygon", {{"kind", "regular"}, {"n", 2}}}}}}, 400);
    EXPECT_EQ(bad_n["error"]["code"], "RangeError");
    EXPECT_EQ(bad_n["error"]["path"], "scene.polygon.n");
    const json missing = call("simson", {{"theta", 1.0}}, 400);
    EXPECT_EQ(missing["error"]["path"], "scene");
    const json extra = call("simson", {{"scene", kTriangle}, {"zoom", 2}}, 400);
    EXPECT_EQ(extra["error"]["path"], "zoom");
    const json wrong_type = call("simson", {{"scene", kTriangle}, {"theta", "north"}}, 400);
    EXPECT_EQ(wrong_type["error"]["path"], "theta");
    const json mismatch = call("simson", {{"op", "verify"}, {"scene", kTriangle}}, 400);
    EXPECT_EQ(mismatch["error"]["path"], "op");
}

TEST(Protocol, unknown_op_is_404) {
    const json out = call("", {{"op", "explode"}, {"scene", kTriangle}}, 404);
    EXPECT_EQ(out["error"]["code"], "UnknownOp");
}

TEST(Protocol, responses_are_canonical) {
    const auto a = protocol::handle_request("simson", json{{"scene", kTriangle}, {"theta", 0.3}}.dump());
    const auto b = protocol::handle_request("simson", json{{"theta", 0.3}, {"scene", kTriangle}}.dump());
    EXPECT_EQ(a.body, b.body);
    const json parsed = json::parse(a.body);
    EXPECT_EQ(a.body, parsed.dump(2) + "\n");
}
