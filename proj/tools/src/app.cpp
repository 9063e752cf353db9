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

#include "mollow_cli/app.hpp"

#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mollow/errors.hpp"
#include "mollow/leapfrog.hpp"
#include "mollow/result_io.hpp"
#include "mollow/sweep.hpp"
#include "mollow_cli/run_config.hpp"

namespace mollow::cli {

namespace {

struct Overrides {
    std::optional<std::size_t> grid;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<double> epsilon;
    bool overlay = false;
    bool no_timestamp = false;
    bool check_truncation = false;
};

void add_overrides(CLI::App& sub, Overrides& o) {
    sub.add_option("--grid", o.grid, "points per scan or map axis")->check(CLI::PositiveNumber);
    sub.add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub.add_option("--out", o.out, "output path stem (extension is added)");
    sub.add_option("--format", o.format, "result format")->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--epsilon", o.epsilon, "fixed starting sensor coupling")->check(CLI::PositiveNumber);
    sub.add_flag("--overlay", o.overlay, "also write the transition-line overlay");
    sub.add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp header (byte-stable output)");
    sub.add_flag("--check-truncation", o.check_truncation, "repeat every value with one more sensor level");
}

void apply(RunConfig& c, const Overrides& o) {
    if (o.grid) {
        if (c.scan) c.scan->points = *o.grid;
        if (c.map) {
            c.map->u.points = *o.grid;
            c.map->v.points = *o.grid;
        }
        if (c.tau) c.tau->range.points = *o.grid;
    }
    if (o.workers) c.run.workers = *o.workers;
    if (o.out) c.run.output = *o.out;
    if (o.format) c.run.format = result_format_from_string(*o.format);
    if (o.epsilon) c.run.epsilon = *o.epsilon;
    if (o.no_timestamp) c.run.timestamp = false;
    if (o.check_truncation) c.run.check_truncation = true;
}

SweepAxis sweep_axis(std::string name, const AxisConfig& a) { return SweepAxis{std::move(name), a.min, a.max, a.points}; }

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

SweepPlan base_plan(const RunConfig& c, const std::string& subcommand) {
    SweepPlan plan;
    plan.system = c.system;
    plan.request = c.request();
    plan.policy = c.policy();
    plan.workers = c.run.workers;
    plan.checkpoint_interval = c.run.checkpoint_interval;
    plan.output_stem = c.run.output;
    plan.output = c.write_options();
    plan.annotations = {{"subcommand", subcommand}, {"config", c.echo()}};
    return plan;
}

SweepPlan scan_plan(const RunConfig& c, const std::string& subcommand) {
    require(c.sensors.size() == 1, subcommand + " needs exactly one sensor");
    require(c.scan.has_value(), subcommand + " needs a 'scan' block");
    SweepPlan plan = base_plan(c, subcommand);
    if (subcommand == "spectrum") {
        require(c.sensors[0].bundle_order == 1, "spectrum needs a sensor with bundle_order 1");
        plan.kind = SweepKind::Spectrum;
    } else {
        require(c.sensors[0].bundle_order >= 2, "autocorr needs a sensor with bundle_order >= 2 (the order)");
        plan.kind = SweepKind::Autocorrelation;
        plan.request.normalization = Normalization::Photon;
    }
    plan.plane = PlaneSpec{{0.0}, {1.0}, {0.0}};
    plan.axes = {sweep_axis("omega", *c.scan)};
    return plan;
}

SweepPlan map_plan(const RunConfig& c, const std::string& subcommand) {
    require(c.map.has_value(), subcommand + " needs a 'map' block");
    if (subcommand == "g2map") {
        require(c.sensors.size() == 2 && c.sensors[0].bundle_order == 1 && c.sensors[1].bundle_order == 1,
                "g2map needs two sensors with bundle_order 1");
    } else if (subcommand == "g3cut") {
        require(c.sensors.size() == 3, "g3cut needs three sensors");
    } else {
        require(c.sensors.size() >= 2, "bundle needs at least two sensors");
    }
    require(subcommand == "bundle" || c.map->has_v, subcommand + " needs a 'map.v' axis");

    SweepPlan plan = base_plan(c, subcommand);
    plan.kind = SweepKind::Map;
    const auto& m = *c.map;
    if (m.u_dir.empty()) {
        plan.plane = PlaneSpec::free_pair(c.sensors.size(), m.free[0], m.free[1], plan.request.frequencies);
        plan.axes = {sweep_axis("omega" + std::to_string(m.free[0] + 1), m.u)};
        if (m.has_v) plan.axes.push_back(sweep_axis("omega" + std::to_string(m.free[1] + 1), m.v));
    } else {
        plan.plane = PlaneSpec{plan.request.frequencies, m.u_dir, m.v_dir};
        plan.axes = {sweep_axis("u", m.u)};
        if (m.has_v) plan.axes.push_back(sweep_axis("v", m.v));
    }
    plan.request.frequencies = plan.plane.origin;
    return plan;
}

void write_overlay_for(const SweepPlan& plan, const ResultGrid& grid, std::ostream& out) {
    const double omega_plus = dressed_splitting(plan.system).omega_plus;
    const auto conditions = enumerate_conditions(plan.request.partition, omega_plus);
    const Overlay overlay = annotate(grid, plan.plane, conditions);
    const std::filesystem::path path = plan.output_stem.string() + ".overlay.json";
    write_overlay(overlay, grid, path);
    out << "wrote " << path.string() << '\n';
}

void report(const ResultGrid& grid, const std::filesystem::path& path, std::ostream& out) {
    std::size_t flagged = 0;
    for (auto f : grid.flags) flagged += f != PointFlag::Ok;
    out << "wrote " << path.string() << " (" << grid.size() << " points, " << flagged << " flagged)\n";
}

int run_sweep_command(const RunConfig& c, const std::string& subcommand, bool overlay, std::ostream& out) {
    const SweepPlan plan = (subcommand == "spectrum" || subcommand == "autocorr") ? scan_plan(c, subcommand)
                                                                                  : map_plan(c, subcommand);
    const ResultGrid grid = run_sweep(plan);
    report(grid, plan.result_path(), out);
    if (overlay) write_overlay_for(plan, grid, out);
    return kOk;
}

int run_tau(const RunConfig& c, std::ostream& out) {
    require(c.sensors.size() == 2, "tau needs exactly two sensors");
    require(c.tau.has_value(), "tau needs a 'tau' block");
    CorrelationRequest request = c.request();
    request.tau = linspace(c.tau->range.min, c.tau->range.max, c.tau->range.points);

    PropagationOptions prop;
    Index dim = 2;
    for (const auto& s : c.sensors) dim *= s.bundle_order + 1 + (c.run.check_truncation ? 1 : 0);
    const bool dense = c.tau->method == "expm" || (c.tau->method == "auto" && dim <= prop.dense_max_dim);
    prop.method = dense ? PropagationMethod::MatrixExponential : PropagationMethod::RungeKutta;

    ResultGrid grid = g_tau(c.system, request, c.policy(), prop);
    grid.metadata["config"] = c.echo();
    grid.metadata["subcommand"] = "tau";
    const std::filesystem::path path = c.run.output + std::string(extension(c.run.format));
    write_result(grid, path, c.write_options());
    report(grid, path, out);
    return kOk;
}

int run_recommend(const RunConfig& c, std::ostream& out) {
    require(!c.sensors.empty(), "recommend needs the sensor groups");
    const double omega_plus = dressed_splitting(c.system).omega_plus;
    double linewidth = c.sensors[0].linewidth;
    for (const auto& s : c.sensors) linewidth = std::min(linewidth, s.linewidth);
    const auto rec = recommend_filters(c.partition(), c.recommend.branch, omega_plus, c.recommend.margin, linewidth,
                                       RecommendOptions{c.recommend.band});
    nlohmann::json j = {{"condition", rec.condition.label()},
                        {"omega_plus", omega_plus},
                        {"partition", c.partition()},
                        {"frequencies", rec.frequencies},
                        {"margin", rec.margin},
                        {"requested_margin", rec.requested_margin},
                        {"rationale", rec.rationale}};
    out << j.dump(2) << '\n';
    return kOk;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Parameter:
        case ErrorKind::Layout:
        case ErrorKind::InvalidDimension:
        case ErrorKind::Capacity: return kConfigError;
        case ErrorKind::Regime: return kRegimeError;
        case ErrorKind::Convergence:
        case ErrorKind::Precision: return kConvergenceError;
        case ErrorKind::Io:
        case ErrorKind::Integrity: return kIoError;
        default: return kFailure;
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frequency-resolved photon correlations of resonance fluorescence", "mollow"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    std::string config_path;
    Overrides overrides;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"spectrum", "filtered emission spectrum over a frequency scan"},
        {"autocorr", "N-photon autocorrelation of one sensor over a frequency scan"},
        {"g2map", "two-photon correlation map over two sensor frequencies"},
        {"g3cut", "planar cut through the three-photon correlation"},
        {"tau", "time-resolved correlation between two sensor groups"},
        {"bundle", "bundle correlation map over two group frequencies"},
        {"recommend", "suggest filter frequencies for a heralding condition"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
        add_overrides(*sub, overrides);
    }
    std::string checkpoint_path;
    auto* resume_cmd = app.add_subcommand("sweep-resume", "continue an interrupted sweep from its checkpoint");
    resume_cmd->add_option("checkpoint", checkpoint_path, "checkpoint file (.ckpt)")->required();
    resume_cmd->add_option("--workers", overrides.workers, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "sweep-resume") {
            const ResultGrid grid = resume(checkpoint_path, overrides.workers.value_or(0));
            out << "resumed " << checkpoint_path << " (" << grid.size() << " points)\n";
            return kOk;
        }
        RunConfig config = RunConfig::load(config_path);
        apply(config, overrides);
        if (name == "tau") return run_tau(config, out);
        if (name == "recommend") return run_recommend(config, out);
        return run_sweep_command(config, name, overrides.overlay, out);
    } catch (const FeasibilityError& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error (io): " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace mollow::cli
