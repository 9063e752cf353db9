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

#include "mollow_cli/run_config.hpp"

#include <cmath>
#include <set>

#include "mollow/errors.hpp"

namespace mollow::cli {

namespace {

using nlohmann::json;

void only_keys(const json& block, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!block.is_object()) throw ConfigError("'" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : block.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("'" + where + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + where + "' must be finite");
    return x;
}

double positive(const json& v, const std::string& where) {
    const double x = number(v, where);
    if (!(x > 0.0)) throw ConfigError("'" + where + "' must be positive");
    return x;
}

long long integer(const json& v, const std::string& where, long long lo) {
    if (!v.is_number_integer()) throw ConfigError("'" + where + "' must be an integer");
    const auto x = v.get<long long>();
    if (x < lo) throw ConfigError("'" + where + "' must be >= " + std::to_string(lo));
    return x;
}

bool boolean(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError("'" + where + "' must be true or false");
    return v.get<bool>();
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("'" + where + "' must be a string");
    return v.get<std::string>();
}

// A frequency: a number, or {"omega_plus": k} for k times the triplet splitting.
class FrequencyReader {
public:
    explicit FrequencyReader(const SystemParams& system) : system_(system) {}

    double operator()(const json& v, const std::string& where) {
        if (v.is_object()) {
            only_keys(v, where, {"omega_plus", "offset"});
            if (!v.contains("omega_plus")) throw ConfigError("'" + where + "' needs 'omega_plus'");
            const double k = number(v.at("omega_plus"), where + ".omega_plus");
            const double offset = v.contains("offset") ? number(v.at("offset"), where + ".offset") : 0.0;
            return k * omega_plus() + offset;
        }
        return number(v, where);
    }

private:
    double omega_plus() {
        if (!cached_) cached_ = dressed_splitting(system_).omega_plus;  // RegimeError if unresolved
        return *cached_;
    }

    SystemParams system_;
    std::optional<double> cached_;
};

AxisConfig read_axis(const json& j, const std::string& where, FrequencyReader& freq) {
    only_keys(j, where, {"min", "max", "points"});
    for (const char* k : {"min", "max", "points"})
        if (!j.contains(k)) throw ConfigError("'" + where + "' needs '" + k + "'");
    AxisConfig a;
    a.min = freq(j.at("min"), where + ".min");
    a.max = freq(j.at("max"), where + ".max");
    a.points = static_cast<std::size_t>(integer(j.at("points"), where + ".points", 1));
    if (a.points > 1 && !(a.max > a.min)) throw ConfigError("'" + where + "' needs max > min");
    return a;
}

std::vector<double> read_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("'" + where + "' must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json axis_echo(const AxisConfig& a) { return {{"min", a.min}, {"max", a.max}, {"points", a.points}}; }

}  // namespace

RunConfig RunConfig::parse(const json& j) {
    only_keys(j, "config", {"system", "sensors", "run", "scan", "map", "tau", "recommend"});
    RunConfig c;
    c.source = j;

    if (!j.contains("system")) throw ConfigError("config needs a 'system' block");
    const auto& s = j.at("system");
    only_keys(s, "system", {"gamma", "rabi", "target_splitting", "detuning"});
    c.system.gamma = s.contains("gamma") ? positive(s.at("gamma"), "system.gamma") : 1.0;
    c.system.detuning = s.contains("detuning") ? number(s.at("detuning"), "system.detuning") : 0.0;
    const bool has_rabi = s.contains("rabi"), has_target = s.contains("target_splitting");
    if (has_rabi == has_target) throw ConfigError("'system' needs exactly one of 'rabi' and 'target_splitting'");
    if (has_rabi) {
        c.system.rabi = positive(s.at("rabi"), "system.rabi");
    } else {
        c.target_splitting = positive(s.at("target_splitting"), "system.target_splitting");
        try {
            c.system.rabi = drive_for_target_splitting(*c.target_splitting, c.system.detuning, c.system.gamma);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("system.target_splitting: ") + e.what());
        }
    }
    c.system.validate();
    FrequencyReader freq(c.system);

    if (j.contains("sensors")) {
        const auto& list = j.at("sensors");
        if (!list.is_array()) throw ConfigError("'sensors' must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "sensors[" + std::to_string(i) + "]";
            const auto& e = list[i];
            only_keys(e, where, {"frequency", "linewidth", "bundle_order"});
            SensorConfig sc;
            if (e.contains("frequency")) sc.frequency = freq(e.at("frequency"), where + ".frequency");
            if (!e.contains("linewidth")) throw ConfigError("'" + where + "' needs 'linewidth'");
            sc.linewidth = positive(e.at("linewidth"), where + ".linewidth");
            if (e.contains("bundle_order")) sc.bundle_order = static_cast<int>(integer(e.at("bundle_order"), where + ".bundle_order", 1));
            c.sensors.push_back(sc);
        }
    }

    if (j.contains("run")) {
        const auto& r = j.at("run");
        only_keys(r, "run", {"epsilon", "tolerance", "max_doublings", "max_halvings", "noise_floor", "workers", "output",
                             "format", "timestamp", "check_truncation", "checkpoint_interval", "max_total_dim",
                             "normalization"});
        auto& b = c.run;
        if (r.contains("epsilon")) b.epsilon = positive(r.at("epsilon"), "run.epsilon");
        if (r.contains("tolerance")) b.tolerance = positive(r.at("tolerance"), "run.tolerance");
        if (r.contains("max_doublings")) b.max_doublings = static_cast<int>(integer(r.at("max_doublings"), "run.max_doublings", 0));
        if (r.contains("max_halvings")) b.max_halvings = static_cast<int>(integer(r.at("max_halvings"), "run.max_halvings", 0));
        if (r.contains("noise_floor")) b.noise_floor = positive(r.at("noise_floor"), "run.noise_floor");
        if (r.contains("workers")) b.workers = static_cast<int>(integer(r.at("workers"), "run.workers", 1));
        if (r.contains("output")) b.output = text(r.at("output"), "run.output");
        if (r.contains("format")) b.format = result_format_from_string(text(r.at("format"), "run.format"));
        if (r.contains("timestamp")) b.timestamp = boolean(r.at("timestamp"), "run.timestamp");
        if (r.contains("check_truncation")) b.check_truncation = boolean(r.at("check_truncation"), "run.check_truncation");
        if (r.contains("checkpoint_interval")) {
            b.checkpoint_interval = static_cast<std::size_t>(integer(r.at("checkpoint_interval"), "run.checkpoint_interval", 1));
        }
        if (r.contains("max_total_dim")) b.max_total_dim = static_cast<Index>(integer(r.at("max_total_dim"), "run.max_total_dim", 2));
        if (r.contains("normalization")) {
            const auto n = text(r.at("normalization"), "run.normalization");
            if (n == "bundle") {
                b.normalization = Normalization::Bundle;
            } else if (n == "photon") {
                b.normalization = Normalization::Photon;
            } else {
                throw ConfigError("run.normalization must be 'bundle' or 'photon'");
            }
        }
    }

    if (j.contains("scan")) c.scan = read_axis(j.at("scan"), "scan", freq);

    if (j.contains("map")) {
        const auto& m = j.at("map");
        only_keys(m, "map", {"u", "v", "free", "u_dir", "v_dir"});
        MapBlock mb;
        if (!m.contains("u")) throw ConfigError("'map' needs a 'u' axis");
        mb.u = read_axis(m.at("u"), "map.u", freq);
        if (m.contains("v")) {
            mb.v = read_axis(m.at("v"), "map.v", freq);
            mb.has_v = true;
        }
        if (m.contains("free")) {
            const auto& f = m.at("free");
            if (!f.is_array() || f.size() != 2) throw ConfigError("'map.free' must list two sensor indices");
            mb.free = {static_cast<std::size_t>(integer(f[0], "map.free[0]", 0)),
                       static_cast<std::size_t>(integer(f[1], "map.free[1]", 0))};
            if (mb.free[0] == mb.free[1]) throw ConfigError("'map.free' indices must differ");
        }
        if (m.contains("u_dir") != m.contains("v_dir")) throw ConfigError("'map' needs both 'u_dir' and 'v_dir' or neither");
        if (m.contains("u_dir")) {
            mb.u_dir = read_vector(m.at("u_dir"), "map.u_dir");
            mb.v_dir = read_vector(m.at("v_dir"), "map.v_dir");
        }
        c.map = mb;
    }

    if (j.contains("tau")) {
        const auto& t = j.at("tau");
        only_keys(t, "tau", {"min", "max", "points", "method"});
        TauBlock tb;
        json range = t;
        range.erase("method");
        tb.range = read_axis(range, "tau", freq);
        if (t.contains("method")) {
            tb.method = text(t.at("method"), "tau.method");
            if (tb.method != "auto" && tb.method != "rk" && tb.method != "expm") {
                throw ConfigError("tau.method must be 'auto', 'rk' or 'expm'");
            }
        }
        c.tau = tb;
    }

    if (j.contains("recommend")) {
        const auto& r = j.at("recommend");
        only_keys(r, "recommend", {"branch", "margin", "band"});
        if (r.contains("branch")) {
            c.recommend.branch = static_cast<int>(integer(r.at("branch"), "recommend.branch", -1));
            if (c.recommend.branch > 1) throw ConfigError("recommend.branch must be -1, 0 or 1");
        }
        if (r.contains("margin")) c.recommend.margin = positive(r.at("margin"), "recommend.margin");
        if (r.contains("band")) c.recommend.band = positive(r.at("band"), "recommend.band");
    }

    // Index checks that need the sensor list.
    if (c.map) {
        for (std::size_t f : c.map->free)
            if (f >= c.sensors.size()) throw ConfigError("'map.free' refers to a missing sensor");
        if (!c.map->u_dir.empty() && (c.map->u_dir.size() != c.sensors.size() || c.map->v_dir.size() != c.sensors.size())) {
            throw ConfigError("'map.u_dir' and 'map.v_dir' need one entry per sensor");
        }
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    const std::string body = read_text(path);
    json j;
    try {
        j = json::parse(body, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse(j);
}

nlohmann::json RunConfig::echo() const {
    json j;
    j["system"] = describe(system);
    if (target_splitting) j["system"]["target_splitting"] = *target_splitting;
    json sensors_j = json::array();
    for (const auto& s : sensors) {
        sensors_j.push_back({{"frequency", s.frequency}, {"linewidth", s.linewidth}, {"bundle_order", s.bundle_order}});
    }
    j["sensors"] = sensors_j;
    json run_j = {{"tolerance", run.tolerance},
                  {"max_doublings", run.max_doublings},
                  {"max_halvings", run.max_halvings},
                  {"noise_floor", run.noise_floor},
                  {"check_truncation", run.check_truncation},
                  {"max_total_dim", run.max_total_dim},
                  {"normalization", run.normalization == Normalization::Bundle ? "bundle" : "photon"},
                  {"format", std::string(to_string(run.format))}};
    if (run.epsilon) run_j["epsilon"] = *run.epsilon;
    j["run"] = run_j;
    if (scan) j["scan"] = axis_echo(*scan);
    if (map) {
        json m = {{"u", axis_echo(map->u)}, {"free", map->free}};
        if (map->has_v) m["v"] = axis_echo(map->v);
        if (!map->u_dir.empty()) {
            m["u_dir"] = map->u_dir;
            m["v_dir"] = map->v_dir;
        }
        j["map"] = m;
    }
    if (tau) j["tau"] = {{"min", tau->range.min}, {"max", tau->range.max}, {"points", tau->range.points}, {"method", tau->method}};
    return j;
}

EpsilonPolicy RunConfig::policy() const {
    EpsilonPolicy p;
    p.tolerance = run.tolerance;
    p.max_doublings = run.max_doublings;
    p.max_halvings = run.max_halvings;
    p.noise_floor = run.noise_floor;
    p.check_truncation = run.check_truncation;
    p.model.max_total_dim = run.max_total_dim;
    return p;
}

WriteOptions RunConfig::write_options() const { return WriteOptions{run.format, run.timestamp}; }

std::vector<int> RunConfig::partition() const {
    std::vector<int> p;
    for (const auto& s : sensors) p.push_back(s.bundle_order);
    return p;
}

CorrelationRequest RunConfig::request() const {
    CorrelationRequest r;
    for (const auto& s : sensors) {
        r.partition.push_back(s.bundle_order);
        r.frequencies.push_back(s.frequency);
        r.linewidths.push_back(s.linewidth);
    }
    r.epsilon = run.epsilon;
    r.normalization = run.normalization;
    return r;
}

}  // namespace mollow::cli
