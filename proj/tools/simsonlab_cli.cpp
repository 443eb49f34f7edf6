#include "simsonlab/app.hpp"
#include "simsonlab/protocol.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
using namespace simsonlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitVerifyFailed = 3;
constexpr int kDefaultPort = 8765;

// Thrown for bad flag values that CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path() && !path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

struct SceneOptions {
    std::string source;
    std::optional<double> theta;
    std::optional<std::size_t> samples;
    std::vector<std::string> show;
    std::vector<std::string> hide;

    void add_to(CLI::App& cmd, bool with_theta) {
        cmd.add_option("-s,--scene", source, "Scene JSON file or regular:<n>[:phase]")->required();
        if (with_theta) cmd.add_option("--theta", theta, "Probe angle in radians");
        cmd.add_option("--samples", samples, "Number of lines in the displayed family");
        cmd.add_option("--show", show, "Turn a display layer on (repeatable)");
        cmd.add_option("--hide", hide, "Turn a display layer off (repeatable)");
    }

    Scene load() const {
        Scene scene = app::load_scene(source);
        if (theta) scene.probe_theta = *theta;
        if (samples) {
            if (*samples < kMinSceneSamples || *samples > kMaxSceneSamples)
                throw Error(ErrorCode::RangeError, "samples must be between 32 and 1000000", "samples");
            scene.samples = *samples;
        }
        auto toggle = [&](const std::vector<std::string>& layers, bool on) {
            for (const auto& layer : layers) {
                if (scene.display.find(layer) == scene.display.end())
                    throw Error(ErrorCode::SchemaError, "unknown display layer '" + layer + "'", "display." + layer);
                scene.display[layer] = on;
            }
        };
        toggle(show, true);
        toggle(hide, false);
        return scene;
    }
};

int run_serve(const std::string& host, std::optional<int> port_flag) {
    int port = kDefaultPort;
    if (port_flag) {
        port = *port_flag;
    } else if (const char* env = std::getenv("SIMSONLAB_PORT"); env && *env) {
        try {
            port = std::stoi(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("SIMSONLAB_PORT is not a port number: ") + env);
        }
    }
    if (port < 1 || port > 65535) throw UsageError("port must be between 1 and 65535");

    httplib::Server server;
    // The library default adds SO_REUSEPORT, which would let a second server
    // share a busy port instead of failing.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto handle = [](std::string_view op) {
        return [op](const httplib::Request& req, httplib::Response& res) {
            const auto out = protocol::handle_request(op, req.body);
            res.status = out.status;
            res.set_content(out.body, "application/json");
        };
    };
    server.Post("/v1", handle(""));
    for (std::string_view op : protocol::kOps) server.Post("/v1/" + std::string(op), handle(op));
    server.Options(R"(/v1(/.*)?)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        std::cerr << req.method << ' ' << req.path << ' ' << res.status << ' ' << req.body.size() << "B in "
                  << res.body.size() << "B out" << std::endl;
    });

    if (!server.bind_to_port(host, port)) {
        std::cerr << "error: cannot listen on " << host << ':' << port << " (port busy?)\n";
        return kExitUsage;
    }
    std::cerr << "serving on http://" << host << ':' << port << "/v1" << std::endl;
    return server.listen_after_bind() ? kExitOk : kExitInternal;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Simson line and hypocycloid laboratory"};
    cli.require_subcommand(1);
    cli.failure_message(CLI::FailureMessage::help);

    SceneOptions render_opts;
    std::string render_out;
    auto* render = cli.add_subcommand("render", "Construction figure at one probe angle");
    render_opts.add_to(*render, true);
    render->add_option("-o,--output", render_out, "Output SVG")->required();

    SceneOptions env_opts;
    std::string env_out;
    std::string trace_json;
    std::size_t envelope_samples = app::kDefaultEnvelopeSamples;
    auto* envelope = cli.add_subcommand("envelope", "Line family with its extracted envelope");
    env_opts.add_to(*envelope, false);
    envelope->add_option("-o,--output", env_out, "Output SVG")->required();
    envelope->add_option("--envelope-samples", envelope_samples, "Grid used to extract the envelope")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{32}, std::size_t{1000000}));
    envelope->add_option("--trace-json", trace_json, "Also write the envelope trace as JSON");

    std::string verify_source;
    std::string verify_out;
    std::size_t verify_samples = app::kDefaultVerifySamples;
    std::optional<int> cusps;
    bool corrupt = false;
    auto* verify = cli.add_subcommand("verify", "Fit a hypocycloid to the envelope and report");
    verify->add_option("-s,--scene", verify_source, "Scene JSON file or regular:<n>[:phase]")->required();
    verify->add_option("-o,--output", verify_out, "Report JSON (default: standard output)");
    verify->add_option("--samples", verify_samples, "Envelope samples")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{32}, std::size_t{1000000}));
    verify->add_option("--cusps", cusps, "Expected cusp count (default: number of vertices)")
        ->check(CLI::Range(3, 64));
    verify->add_flag("--corrupt-trace", corrupt, "Test hook: perturb the envelope before fitting")->group("");

    SceneOptions anim_opts;
    std::string anim_dir = "frames";
    std::size_t frames = 100;
    auto* animate = cli.add_subcommand("animate", "One SVG per probe angle with a growing locus");
    anim_opts.add_to(*animate, false);
    animate->add_option("-o,--output", anim_dir, "Output directory")->capture_default_str();
    animate->add_option("--frames", frames, "Number of frames")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));

    std::string host = "127.0.0.1";
    std::optional<int> port;
    auto* serve = cli.add_subcommand("serve", "Serve the kernel protocol over local HTTP");
    serve->add_option("--port", port, "Port (default: $SIMSONLAB_PORT or 8765)");
    serve->add_option("--host", host, "Interface to bind")->capture_default_str();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        if (code == 0) return kExitOk;
        return kExitUsage;
    }

    try {
        if (*render) {
            const Scene scene = render_opts.load();
            write_atomic(render_out, app::render_construction(scene, scene.probe_theta));
        } else if (*envelope) {
            const Scene scene = env_opts.load();
            const auto fig = app::render_envelope(scene, envelope_samples);
            write_atomic(env_out, fig.svg);
            if (!trace_json.empty()) write_atomic(trace_json, canonical_dump(app::trace_to_json(fig.trace)));
        } else if (*verify) {
            const Scene scene = app::load_scene(verify_source);
            TraceHook hook;
            if (corrupt) {
                hook = [](EnvelopeTrace t) {
                    for (std::size_t i = 0; i < t.points.size(); i += 7) t.points[i] = 1.1 * t.points[i];
                    return t;
                };
            }
            const FitReport report = app::verify_scene(scene, verify_samples, cusps, hook);
            const std::string text = write_report(report);
            if (verify_out.empty() || verify_out == "-") {
                std::cout << text;
            } else {
                write_atomic(verify_out, text);
            }
            if (!report.passed) {
                std::cerr << "verification failed: " << to_string(report.reason) << '\n';
                return kExitVerifyFailed;
            }
        } else if (*animate) {
            const Scene scene = anim_opts.load();
            const auto thetas = app::animation_thetas(scene, frames);
            const double extent = app::envelope_frame_extent(scene);
            std::vector<Line> locus;
            locus.reserve(frames);
            for (std::size_t i = 0; i < frames; ++i) {
                const SimsonResult r = simson_line_polygon(scene.polygon, {thetas[i]});
                if (!r.degenerate) locus.push_back(r.line);
                write_atomic(fs::path(anim_dir) / app::frame_name(i, frames),
                             app::render_construction(scene, thetas[i], locus, extent));
            }
        } else if (*serve) {
            return run_serve(host, port);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::InconsistentArtifacts ? kExitInternal : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}
