#include "simsonlab/protocol.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <arpa/inet.h>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <netinet/in.h>
#include <sstream>
#include <string>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kCli = SIMSONLAB_CLI_PATH;
const fs::path kSourceDir = SIMSONLAB_SOURCE_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               ("simsonlab_cli_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" +
                std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome run(const std::vector<std::string>& args) const {
        std::string cmd = "cd " + quote(kSourceDir.string()) + " && " + quote(kCli.string());
        for (const auto& a : args) cmd += " " + quote(a);
        cmd += " >" + quote((dir_ / "stdout").string()) + " 2>" + quote((dir_ / "stderr").string());
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(dir_ / "stdout");
        r.err = slurp(dir_ / "stderr");
        return r;
    }

    fs::path dir_;
};

struct Figure {
    std::string name;
    std::vector<std::string> args;
};

const std::vector<Figure> kFigures{
    {"fig07", {"render", "--scene", "scenes/fig07_deltoid.json"}},
    {"fig08", {"render", "--scene", "regular:3", "--theta", "0.7"}},
    {"fig09", {"envelope", "--scene", "scenes/fig09_equilateral.json"}},
    {"fig12", {"envelope", "--scene", "scenes/fig12_square.json"}},
    {"fig13", {"envelope", "--scene", "regular:5", "--samples", "720"}},
    {"fig14", {"envelope", "--scene", "regular:6"}},
};

} // namespace

// =============================================================================
// Goldens
// =============================================================================

TEST_F(CliTest, figure_goldens) {
    const bool update = std::getenv("SIMSONLAB_UPDATE_GOLDENS") != nullptr;
    const fs::path golden_dir = kSourceDir / "tests" / "golden";
    for (const auto& fig : kFigures) {
        SCOPED_TRACE(fig.name);
        auto args = fig.args;
        const fs::path first = dir_ / (fig.name + ".svg");
        const fs::path second = dir_ / (fig.name + ".again.svg");
        args.insert(args.end(), {"-o", first.string()});
        ASSERT_EQ(run(args).code, 0);
        args.back() = second.string();
        ASSERT_EQ(run(args).code, 0);
        const std::string bytes = slurp(first);
        EXPECT_EQ(bytes, slurp(second)) << "regeneration is not byte-identical";

        const fs::path golden = golden_dir / (fig.name + ".svg");
        if (update) {
            fs::create_directories(golden_dir);
            fs::copy_file(first, golden, fs::copy_options::overwrite_existing);
            continue;
        }
        ASSERT_TRUE(fs::exists(golden)) << golden << " missing; rerun with SIMSONLAB_UPDATE_GOLDENS=1";
        EXPECT_TRUE(bytes == slurp(golden)) << golden << " differs from the regenerated figure";
    }
}

TEST_F(CliTest, scene_file_and_shorthand_agree) {
    ASSERT_EQ(run({"render", "-s", "scenes/fig08_simson_line.json", "-o", (dir_ / "a.svg").string()}).code, 0);
    ASSERT_EQ(run({"render", "-s", "regular:3", "--theta", "0.7", "-o", (dir_ / "b.svg").string()}).code, 0);
    EXPECT_EQ(slurp(dir_ / "a.svg"), slurp(dir_ / "b.svg"));
}

// =============================================================================
// Exit codes
// =============================================================================

TEST_F(CliTest, missing_output_is_usage_error) {
    const Outcome r = run({"render", "--scene", "regular:3"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--output"), std::string::npos);
    EXPECT_NE(r.err.find("Usage:"), std::string::npos);
}

TEST_F(CliTest, usage_errors_exit_2) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"render", "--scene", "regular:3", "--theta", "abc", "-o", (dir_ / "x.svg").string()}).code, 2);
    EXPECT_EQ(run({"animate", "--scene", "regular:3", "--frames", "1", "-o", dir_.string()}).code, 2);
}

TEST_F(CliTest, scene_errors_exit_2_with_message) {
    const Outcome bad_n = run({"render", "--scene", "regular:2", "-o", (dir_ / "x.svg").string()});
    EXPECT_EQ(bad_n.code, 2);
    EXPECT_NE(bad_n.err.find("polygon.n"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "x.svg"));

    std::ofstream(dir_ / "bad.json") << R"({"polygon": {"kind": "regular", "n": 3}, "samples": 8})";
    const Outcome small = run({"envelope", "--scene", (dir_ / "bad.json").string(), "-o", (dir_ / "x.svg").string()});
    EXPECT_EQ(small.code, 2);
    EXPECT_NE(small.err.find("samples"), std::string::npos);

    EXPECT_EQ(run({"render", "--scene", (dir_ / "missing.json").string(), "-o", (dir_ / "x.svg").string()}).code, 2);
    EXPECT_EQ(run({"render", "--scene", "regular:3", "--hide", "grid", "-o", (dir_ / "x.svg").string()}).code, 2);
}

TEST_F(CliTest, unwritable_output_is_internal_failure) {
    EXPECT_EQ(run({"render", "--scene", "regular:3", "-o", "/dev/null/fig.svg"}).code, 1);
}

TEST_F(CliTest, verify_passes_and_writes_report) {
    const Outcome tri = run({"verify", "--scene", "regular:3"});
    EXPECT_EQ(tri.code, 0);
    const auto report = nlohmann::json::parse(tri.out);
    EXPECT_EQ(report["passed"], true);
    EXPECT_EQ(report["n_cusps_detected"], 3);

    const fs::path out = dir_ / "square.json";
    EXPECT_EQ(run({"verify", "--scene", "regular:4", "-o", out.string()}).code, 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(out))["n_cusps_detected"], 4);
}

TEST_F(CliTest, failed_verification_exits_3) {
    const fs::path out = dir_ / "r.json";
    EXPECT_EQ(run({"verify", "--scene", "regular:3", "--corrupt-trace", "-o", out.string()}).code, 3);
    const auto report = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(report["passed"], false);
    EXPECT_EQ(report["reason"], "max_dev_exceeded");
    EXPECT_EQ(run({"verify", "--scene", "regular:4", "--cusps", "3", "--samples", "720"}).code, 3);
}

TEST_F(CliTest, envelope_trace_json) {
    const fs::path trace = dir_ / "trace.json";
    ASSERT_EQ(run({"envelope", "--scene", "regular:4", "-o", (dir_ / "e.svg").string(), "--trace-json",
                   trace.string()})
                  .code,
              0);
    const auto j = nlohmann::json::parse(slurp(trace));
    EXPECT_EQ(j["points"].size(), 720u);
    EXPECT_EQ(j["cusps"].size(), 4u);
}

TEST_F(CliTest, rerun_overwrites_without_leftovers) {
    const fs::path out = dir_ / "f.svg";
    ASSERT_EQ(run({"render", "--scene", "regular:4", "--theta", "1.0", "-o", out.string()}).code, 0);
    ASSERT_EQ(run({"render", "--scene", "regular:4", "--theta", "1.0", "-o", out.string()}).code, 0);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir_)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    EXPECT_EQ(names, (std::vector<std::string>{"f.svg", "stderr", "stdout"}));
}

// =============================================================================
// Animation
// =============================================================================

TEST_F(CliTest, animate_two_frames) {
    const fs::path frames = dir_ / "frames";
    ASSERT_EQ(run({"animate", "--scene", "regular:3", "--frames", "2", "-o", frames.string()}).code, 0);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(frames)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    EXPECT_EQ(names, (std::vector<std::string>{"frame_0001.svg", "frame_0002.svg"}));
}

TEST_F(CliTest, animate_locus_grows_to_full_family) {
    const fs::path frames = dir_ / "frames";
    ASSERT_EQ(run({"animate", "--scene", "regular:3", "--frames", "100", "-o", frames.string()}).code, 0);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(frames)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    ASSERT_EQ(names.size(), 100u);
    EXPECT_EQ(names.front(), "frame_0001.svg");
    EXPECT_EQ(names.back(), "frame_0100.svg");

    auto locus_lines = [&](const std::string& name) {
        const std::string svg = slurp(frames / name);
        const auto start = svg.find("<g id=\"locus\"");
        if (start == std::string::npos) return std::size_t{0};
        const std::string group = svg.substr(start, svg.find("</g>", start) - start);
        std::size_t n = 0;
        for (auto pos = group.find("<line"); pos != std::string::npos; pos = group.find("<line", pos + 1)) ++n;
        return n;
    };
    EXPECT_EQ(locus_lines("frame_0001.svg"), 1u);
    EXPECT_EQ(locus_lines("frame_0050.svg"), 50u);
    EXPECT_EQ(locus_lines("frame_0100.svg"), 100u);

    // The last frame's locus is the 100-line display family.
    ASSERT_EQ(run({"envelope", "--scene", "regular:3", "-o", (dir_ / "env.svg").string()}).code, 0);
    const std::string env = slurp(dir_ / "env.svg");
    const std::string last = slurp(frames / "frame_0100.svg");
    auto group = [](const std::string& svg, const std::string& id) {
        const auto start = svg.find("<g id=\"" + id + "\"");
        return svg.substr(start, svg.find("</g>", start) - start);
    };
    EXPECT_EQ(group(last, "locus"), group(env, "locus"));
}

// =============================================================================
// serve
// =============================================================================

namespace {

int free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

struct Server {
    pid_t pid = -1;
    explicit Server(int port, const fs::path& log) {
        pid = ::fork();
        if (pid == 0) {
            const std::string port_text = std::to_string(port);
            if (!std::freopen(log.c_str(), "w", stderr)) std::_Exit(126);
            ::execl(kCli.c_str(), kCli.c_str(), "serve", "--port", port_text.c_str(), static_cast<char*>(nullptr));
            std::_Exit(127);
        }
    }
    ~Server() {
        if (pid > 0) {
            ::kill(pid, SIGTERM);
            ::waitpid(pid, nullptr, 0);
        }
    }
};

} // namespace

TEST_F(CliTest, serve_answers_protocol_requests) {
    const int port = free_port();
    Server server(port, dir_ / "serve.log");
    httplib::Client client("127.0.0.1", port);
    const std::string scene = R"({"scene": {"polygon": {"kind": "regular", "n": 3}}, "theta": 0.7})";
    httplib::Result res;
    for (int i = 0; i < 100 && !res; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        res = client.Post("/v1/simson", scene, "application/json");
    }
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, simsonlab::protocol::handle_request("simson", scene).body);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");

    const auto bad = client.Post("/v1/envelope", R"({"scene": {"polygon": {"kind": "regular", "n": 2}}})",
                                 "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(nlohmann::json::parse(bad->body)["error"]["path"], "scene.polygon.n");

    const auto render = client.Post("/v1/render", scene, "application/json");
    ASSERT_TRUE(render);
    EXPECT_EQ(render->status, 200);

    const auto unknown = client.Post("/v1/explode", scene, "application/json");
    ASSERT_TRUE(unknown);
    EXPECT_EQ(unknown->status, 404);

    // Concurrent requests are independent.
    std::vector<std::thread> workers;
    std::vector<int> statuses(8, 0);
    for (int i = 0; i < 8; ++i) {
        workers.emplace_back([&, i] {
            httplib::Client c("127.0.0.1", port);
            const auto r = c.Post("/v1/simson", scene, "application/json");
            statuses[i] = r ? r->status : -1;
        });
    }
    for (auto& w : workers) w.join();
    for (int s : statuses) EXPECT_EQ(s, 200);

    const std::string log = slurp(dir_ / "serve.log");
    EXPECT_NE(log.find("POST /v1/simson 200"), std::string::npos);
    EXPECT_NE(log.find("POST /v1/envelope 400"), std::string::npos);
}

TEST_F(CliTest, serve_exits_2_when_port_busy) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
    ASSERT_EQ(::listen(fd, 1), 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    const Outcome r = run({"serve", "--port", std::to_string(ntohs(addr.sin_port))});
    ::close(fd);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("port"), std::string::npos);
}
