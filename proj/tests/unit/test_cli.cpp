// Copyright 2026 The Mollow Sensors Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mollow/errors.hpp"
#include "mollow/leapfrog.hpp"
#include "mollow/result_io.hpp"
#include "mollow_cli/app.hpp"
#include "mollow_cli/run_config.hpp"

using namespace mollow;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MOLLOW_CONFIG_DIR;

struct Run {
    int code = 0;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mollow");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("mollow_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name, const nlohmann::json& body) const {
        const fs::path p = dir / name;
        write_text(p, body.dump(2));
        return p.string();
    }
    std::string stem(const std::string& name) const { return (dir / name).string(); }
};

nlohmann::json small_map_config() {
    return {{"system", {{"rabi", 5.0}}},
            {"sensors", {{{"linewidth", 1.0}}, {{"linewidth", 1.0}}}},
            {"map",
             {{"u", {{"min", -12.0}, {"max", 12.0}, {"points", 3}}},
              {"v", {{"min", -12.0}, {"max", 12.0}, {"points", 3}}}}}};
}

}  // namespace

TEST_CASE("configuration schema") {
    auto base = small_map_config();
    const cli::RunConfig c = cli::RunConfig::parse(base);
    CHECK(c.system.gamma == 1.0);
    CHECK(c.system.rabi == 5.0);
    CHECK(c.sensors.size() == 2);

    auto both = base;
    both["system"]["target_splitting"] = 10.0;
    CHECK_THROWS_AS(cli::RunConfig::parse(both), ConfigError);
    auto neither = base;
    neither["system"].erase("rabi");
    CHECK_THROWS_AS(cli::RunConfig::parse(neither), ConfigError);
    auto unknown = base;
    unknown["run"] = {{"wrokers", 2}};
    CHECK_THROWS_AS(cli::RunConfig::parse(unknown), ConfigError);
    auto negative = base;
    negative["sensors"][0]["linewidth"] = -1.0;
    CHECK_THROWS_AS(cli::RunConfig::parse(negative), ConfigError);
    auto fmt = base;
    fmt["run"] = {{"format", "xml"}};
    CHECK_THROWS_AS(cli::RunConfig::parse(fmt), ConfigError);

    nlohmann::json target = {{"system", {{"target_splitting", 300.0}, {"detuning", 200.0}}},
                             {"sensors", {{{"linewidth", 2.0}, {"frequency", {{"omega_plus", 0.5}}}}}}};
    const cli::RunConfig t = cli::RunConfig::parse(target);
    CHECK(dressed_splitting(t.system).omega_plus == doctest::Approx(300.0).epsilon(1e-9));
    CHECK(t.sensors[0].frequency == doctest::Approx(150.0).epsilon(1e-9));

    nlohmann::json weak = {{"system", {{"rabi", 0.1}}},
                           {"sensors", {{{"linewidth", 1.0}, {"frequency", {{"omega_plus", 1}}}}}}};
    CHECK_THROWS_AS(cli::RunConfig::parse(weak), RegimeError);
}

TEST_CASE("usage errors exit with the config code") {
    CHECK(invoke({}).code == cli::kConfigError);
    CHECK(invoke({"spectrum", (kConfigs / "triplet_spectrum.json").string(), "--bogus"}).code == cli::kConfigError);
    CHECK(invoke({"frobnicate"}).code == cli::kConfigError);
    CHECK(invoke({"spectrum", "/nonexistent/config.json"}).code == cli::kConfigError);
    CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("exit codes for config, regime, convergence and I/O errors") {
    Scratch s("codes");
    auto bad = small_map_config();
    bad["system"]["gamma"] = 0.0;
    CHECK(invoke({"g2map", s.file("bad.json", bad)}).code == cli::kConfigError);

    nlohmann::json weak = {{"system", {{"rabi", 0.1}}},
                           {"sensors", {{{"linewidth", 1.0}}}},
                           {"scan", {{"min", {{"omega_plus", -1}}}, {"max", {{"omega_plus", 1}}}, {"points", 3}}}};
    const Run regime = invoke({"spectrum", s.file("weak.json", weak), "--out", s.stem("weak")});
    CHECK(regime.code == cli::kRegimeError);
    CHECK(regime.err.find("regime") != std::string::npos);

    nlohmann::json strict = {{"system", {{"rabi", 5.0}}},
                             {"sensors", {{{"linewidth", 1.0}, {"frequency", 9.9}}, {{"linewidth", 1.0}, {"frequency", -9.9}}}},
                             {"tau", {{"min", 0.0}, {"max", 1.0}, {"points", 3}}},
                             {"run", {{"tolerance", 1e-12}, {"max_halvings", 0}}}};
    CHECK(invoke({"tau", s.file("strict.json", strict), "--out", s.stem("strict")}).code == cli::kConvergenceError);

    CHECK(invoke({"g2map", s.file("ok.json", small_map_config()), "--out", "/nonexistent_dir/x"}).code == cli::kIoError);
}

TEST_CASE("spectrum subcommand writes the triplet") {
    Scratch s("spectrum");
    const Run r = invoke({"spectrum", (kConfigs / "triplet_spectrum.json").string(), "--grid", "401", "--out",
                          s.stem("spec"), "--no-timestamp"});
    REQUIRE(r.code == cli::kOk);
    const ResultGrid g = read_result(s.stem("spec") + ".csv");
    REQUIRE(g.size() == 401);
    const double wp = dressed_splitting({0.0, 5.0, 1.0}).omega_plus;
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < g.size(); ++i)
        if (g.values[i] > g.values[i - 1] && g.values[i] > g.values[i + 1]) maxima.push_back(g.axes[0].values[i]);
    REQUIRE(maxima.size() == 3);
    const double step = g.axes[0].values[1] - g.axes[0].values[0];
    CHECK(std::abs(maxima[0] + wp) <= step);
    CHECK(std::abs(maxima[1]) <= step);
    CHECK(std::abs(maxima[2] - wp) <= step);

    // Every physical number of the run appears in the header echo.
    const auto& echo = g.metadata["annotations"]["config"];
    CHECK(echo["system"]["rabi"] == 5.0);
    CHECK(echo["system"]["gamma"] == 1.0);
    CHECK(echo["system"]["detuning"] == 0.0);
    CHECK(echo["sensors"][0]["linewidth"] == 1.0);
    CHECK(echo["scan"]["points"] == 401);
    CHECK(g.metadata["version"] == version());
    CHECK(g.metadata["verdict"]["flag_counts"]["ok"] == 401);
}

TEST_CASE("identical runs give identical bytes") {
    Scratch s("determinism");
    const std::string cfg = s.file("map.json", small_map_config());
    REQUIRE(invoke({"g2map", cfg, "--out", s.stem("a"), "--no-timestamp", "--workers", "1"}).code == cli::kOk);
    REQUIRE(invoke({"g2map", cfg, "--out", s.stem("b"), "--no-timestamp", "--workers", "3"}).code == cli::kOk);
    CHECK(read_text(s.stem("a") + ".csv") == read_text(s.stem("b") + ".csv"));
    REQUIRE(invoke({"g2map", cfg, "--out", s.stem("c"), "--format", "json"}).code == cli::kOk);
    CHECK(read_text(s.stem("c") + ".json").find("\"timestamp\"") != std::string::npos);
}

TEST_CASE("bundle map with overlay sidecar") {
    Scratch s("bundle");
    const Run r = invoke({"bundle", (kConfigs / "bundle_2_1.json").string(), "--grid", "9", "--out", s.stem("b"),
                          "--overlay", "--workers", "2"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    const ResultGrid g = read_result(s.stem("b") + ".csv");
    CHECK(g.size() == 81);
    const auto overlay = nlohmann::json::parse(read_text(s.stem("b") + ".overlay.json"));
    CHECK(overlay["format"] == "mollow-overlay");
    std::vector<std::string> labels;
    for (const auto& l : overlay["lines"]) labels.push_back(l["label"]);
    CHECK(std::find(labels.begin(), labels.end(), "2w1+w2=+W") != labels.end());
    CHECK(std::find(labels.begin(), labels.end(), "w1+w2=0") != labels.end());
}

TEST_CASE("recommend prints a consistent pair") {
    const Run r = invoke({"recommend", (kConfigs / "recommend_1_2.json").string()});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    const auto j = nlohmann::json::parse(r.out);
    const std::vector<double> f = j["frequencies"];
    const double wp = j["omega_plus"];
    CHECK(std::abs(f[0] + 2 * f[1] - wp) < 1e-6 * wp);
    CHECK(exclusion_distance(std::vector<int>{1, 2}, f, wp) >= 3.0 * 5.0);
}

TEST_CASE("sweep-resume continues a checkpoint") {
    Scratch s("resume");
    const std::string cfg = s.file("map.json", small_map_config());
    REQUIRE(invoke({"g2map", cfg, "--out", s.stem("m"), "--no-timestamp"}).code == cli::kOk);
    const std::string first = read_text(s.stem("m") + ".csv");
    fs::remove(s.stem("m") + ".csv");
    const Run r = invoke({"sweep-resume", s.stem("m") + ".ckpt", "--workers", "2"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(read_text(s.stem("m") + ".csv") == first);
    CHECK(invoke({"sweep-resume", s.stem("missing") + ".ckpt"}).code == cli::kIoError);

    // A different plan on the same output stem is refused.
    auto edited = small_map_config();
    edited["system"]["rabi"] = 6.0;
    CHECK(invoke({"g2map", s.file("edited.json", edited), "--out", s.stem("m"), "--no-timestamp"}).code ==
          cli::kConfigError);
}

TEST_CASE("tau subcommand") {
    Scratch s("tau");
    const Run r = invoke({"tau", (kConfigs / "tau_leapfrog.json").string(), "--grid", "21", "--out", s.stem("t")});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    const ResultGrid g = read_result(s.stem("t") + ".csv");
    CHECK(g.size() == 21);
    CHECK(g.axes[0].name == "tau");
    // Degenerate leapfrog pair: symmetric in time.
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(g.values[i] - g.values[20 - i]) <= 0.02 * g.values[10]);
}
