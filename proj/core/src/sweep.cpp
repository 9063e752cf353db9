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

#include "mollow/sweep.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <zlib.h>

#include "mollow/errors.hpp"
#include "mollow/parallel.hpp"

namespace mollow {

namespace {

constexpr std::array<char, 5> kMagic{'M', 'C', 'K', 'P', '1'};
constexpr char kRecordTag = 'R';
constexpr char kIndexTag = 'I';
constexpr std::size_t kRecordBody = 1 + 8 + 8 + 1 + 8 + 8;
constexpr std::size_t kRecordSize = kRecordBody + 4;

const char* kind_name(SweepKind k) {
    switch (k) {
        case SweepKind::Spectrum: return "spectrum";
        case SweepKind::Autocorrelation: return "autocorrelation";
        case SweepKind::Map: return "map";
    }
    return "map";
}

SweepKind kind_from_name(const std::string& s) {
    if (s == "spectrum") return SweepKind::Spectrum;
    if (s == "autocorrelation") return SweepKind::Autocorrelation;
    if (s == "map") return SweepKind::Map;
    throw ConfigError("unknown sweep kind '" + s + "'");
}

std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

template <class T>
void put(std::string& buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <class T>
T get(const unsigned char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

std::string encode_record(std::uint64_t index, double value, PointFlag flag, double eps, double change) {
    std::string r;
    r.reserve(kRecordSize);
    r.push_back(kRecordTag);
    put(r, index);
    put(r, value);
    put(r, static_cast<std::uint8_t>(flag));
    put(r, eps);
    put(r, change);
    put(r, crc32_of(reinterpret_cast<const unsigned char*>(r.data()), r.size()));
    return r;
}

std::string encode_header(const SweepPlan& plan) {
    const std::string body = plan.to_json().dump();
    std::string h(kMagic.begin(), kMagic.end());
    put(h, static_cast<std::uint32_t>(body.size()));
    h += body;
    put(h, plan.hash());
    put(h, crc32_of(reinterpret_cast<const unsigned char*>(h.data()), h.size()));
    return h;
}

std::string encode_index(const std::vector<bool>& completed) {
    std::string r;
    r.push_back(kIndexTag);
    put(r, static_cast<std::uint64_t>(completed.size()));
    std::string bits((completed.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < completed.size(); ++i)
        if (completed[i]) bits[i / 8] = static_cast<char>(bits[i / 8] | (1 << (i % 8)));
    r += bits;
    put(r, crc32_of(reinterpret_cast<const unsigned char*>(r.data()), r.size()));
    return r;
}

nlohmann::json axis_json(const SweepAxis& a) {
    return {{"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
}

class CheckpointWriter {
public:
    CheckpointWriter(const std::filesystem::path& path, bool fresh, const SweepPlan& plan) : path_(path) {
        file_ = std::fopen(path.c_str(), fresh ? "wb" : "ab");
        if (!file_) throw IoError("cannot open checkpoint '" + path.string() + "' for writing");
        if (fresh) {
            write(encode_header(plan));
            flush();
        }
    }
    CheckpointWriter(const CheckpointWriter&) = delete;
    CheckpointWriter& operator=(const CheckpointWriter&) = delete;
    ~CheckpointWriter() {
        if (file_) std::fclose(file_);
    }

    void write(const std::string& bytes) {
        if (std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size()) {
            throw IoError("failed writing checkpoint '" + path_.string() + "'");
        }
    }
    void flush() {
        if (std::fflush(file_) != 0) throw IoError("failed flushing checkpoint '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

void check_writable(const std::filesystem::path& path) {
    const bool existed = std::filesystem::exists(path);
    {
        std::ofstream probe(path, std::ios::binary | std::ios::app);
        if (!probe) throw IoError("output '" + path.string() + "' is not writable");
    }
    if (!existed) std::filesystem::remove(path);
}

std::vector<Axis> grid_axes(const SweepPlan& plan) {
    std::vector<Axis> axes;
    for (const auto& a : plan.axes) axes.push_back(Axis{a.name, "gamma", a.values()});
    return axes;
}

CorrelationValue evaluate_point(const SweepPlan& plan, const std::vector<double>& coords) {
    switch (plan.kind) {
        case SweepKind::Spectrum:
            return spectrum_point(plan.system, plan.request.linewidths[0], coords[0], plan.policy, plan.request.epsilon);
        case SweepKind::Autocorrelation: {
            CorrelationRequest r = plan.request;
            r.frequencies = {coords[0]};
            return g_zero_delay_flagged(plan.system, r, plan.policy);
        }
        case SweepKind::Map: {
            CorrelationRequest r = plan.request;
            r.frequencies = plan.plane.frequencies(coords[0], coords.size() > 1 ? coords[1] : 0.0);
            return g_zero_delay_flagged(plan.system, r, plan.policy);
        }
    }
    throw ConfigError("unknown sweep kind");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ResultGrid assemble(const SweepPlan& plan, const Checkpoint& state) {
    ResultGrid grid = ResultGrid::with_axes(grid_axes(plan));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.set(i, state.values[i], state.flags[i], state.epsilon[i], state.epsilon_change[i]);
    }
    if (plan.kind == SweepKind::Spectrum) normalize_to_unit_sum(grid);
    grid.metadata["kind"] = kind_name(plan.kind);
    grid.metadata["system"] = describe(plan.system);
    grid.metadata["request"] = describe(plan.request);
    grid.metadata["policy"] = describe(plan.policy);
    nlohmann::json identity = plan.identity();
    identity.erase("annotations");
    grid.metadata["plan"] = identity;
    grid.metadata["plan_hash"] = hex64(plan.hash());
    grid.metadata["version"] = version();
    if (!plan.annotations.empty()) grid.metadata["annotations"] = plan.annotations;
    summarize_verdicts(grid);
    return grid;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void SweepPlan::validate() const {
    system.validate();
    if (axes.empty() || axes.size() > 2) throw ConfigError("a sweep needs one or two axes");
    std::set<std::string> names;
    for (const auto& a : axes) {
        if (a.count < 1) throw ConfigError("axis '" + a.name + "' needs at least one point");
        if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw ConfigError("axis '" + a.name + "' has a non-finite bound");
        if (!names.insert(a.name).second) throw ConfigError("duplicate axis name '" + a.name + "'");
    }
    if (workers < 1) throw ConfigError("worker count must be >= 1");
    if (checkpoint_interval < 1) throw ConfigError("checkpoint interval must be >= 1");
    if (output_stem.empty()) throw ConfigError("sweep needs an output path stem");

    switch (kind) {
        case SweepKind::Spectrum:
        case SweepKind::Autocorrelation:
            if (axes.size() != 1) throw ConfigError("frequency scans take exactly one axis");
            if (request.partition.size() != 1 || request.linewidths.size() != 1) {
                throw ConfigError("frequency scans take exactly one sensor");
            }
            if (kind == SweepKind::Spectrum && request.partition[0] != 1) {
                throw ConfigError("the spectrum uses a one-photon sensor");
            }
            if (kind == SweepKind::Autocorrelation) {
                if (request.partition[0] < 2) throw ConfigError("autocorrelation order must be >= 2");
                if (request.normalization != Normalization::Photon) {
                    throw ConfigError("autocorrelation scans use photon normalization");
                }
            }
            if (!(request.linewidths[0] > 0.0)) throw ConfigError("linewidth must be positive");
            break;
        case SweepKind::Map:
            request.validate();
            if (plane.origin.size() != request.partition.size() || plane.u_dir.size() != request.partition.size() ||
                plane.v_dir.size() != request.partition.size()) {
                throw ConfigError("plane does not match the number of sensor groups");
            }
            break;
    }
    // Capacity is a property of the plan, not of a point.
    CorrelationRequest probe = request;
    probe.frequencies.resize(probe.partition.size(), 0.0);
    build_model(system, probe.sensors(policy.check_truncation ? 1 : 0), 1.0, policy.model);
}

nlohmann::json SweepPlan::identity() const {
    nlohmann::json axes_j = nlohmann::json::array();
    for (const auto& a : axes) axes_j.push_back(axis_json(a));
    nlohmann::json req = describe(request);
    req.erase("tau_count");
    return {{"kind", kind_name(kind)},
            {"system", {{"detuning", system.detuning}, {"rabi", system.rabi}, {"gamma", system.gamma}}},
            {"request", req},
            {"plane", {{"origin", plane.origin}, {"u", plane.u_dir}, {"v", plane.v_dir}}},
            {"axes", axes_j},
            {"policy",
             {{"tolerance", policy.tolerance},
              {"max_doublings", policy.max_doublings},
              {"max_halvings", policy.max_halvings},
              {"noise_floor", policy.noise_floor},
              {"imaginary_tolerance", policy.imaginary_tolerance},
              {"check_truncation", policy.check_truncation},
              {"validate_state", policy.validate_state},
              {"max_total_dim", policy.model.max_total_dim}}},
            {"output", {{"format", to_string(output.format)}, {"timestamp", output.timestamp}}},
            {"annotations", annotations}};
}

nlohmann::json SweepPlan::to_json() const {
    nlohmann::json j = identity();
    j["workers"] = workers;
    j["checkpoint_interval"] = checkpoint_interval;
    j["output_stem"] = output_stem.string();
    return j;
}

SweepPlan SweepPlan::from_json(const nlohmann::json& j) {
    try {
        SweepPlan p;
        p.kind = kind_from_name(j.at("kind").get<std::string>());
        const auto& s = j.at("system");
        p.system = SystemParams{s.at("detuning").get<double>(), s.at("rabi").get<double>(), s.at("gamma").get<double>()};
        const auto& r = j.at("request");
        p.request.partition = r.at("partition").get<std::vector<int>>();
        p.request.frequencies = r.at("frequencies").get<std::vector<double>>();
        p.request.linewidths = r.at("linewidths").get<std::vector<double>>();
        p.request.normalization = r.at("normalization").get<std::string>() == "photon" ? Normalization::Photon
                                                                                       : Normalization::Bundle;
        if (r.contains("epsilon")) p.request.epsilon = r.at("epsilon").get<double>();
        const auto& pl = j.at("plane");
        p.plane.origin = pl.at("origin").get<std::vector<double>>();
        p.plane.u_dir = pl.at("u").get<std::vector<double>>();
        p.plane.v_dir = pl.at("v").get<std::vector<double>>();
        for (const auto& a : j.at("axes")) {
            p.axes.push_back(SweepAxis{a.at("name").get<std::string>(), a.at("min").get<double>(),
                                       a.at("max").get<double>(), a.at("count").get<std::size_t>()});
        }
        const auto& po = j.at("policy");
        p.policy.tolerance = po.at("tolerance").get<double>();
        p.policy.max_doublings = po.at("max_doublings").get<int>();
        p.policy.max_halvings = po.at("max_halvings").get<int>();
        p.policy.noise_floor = po.at("noise_floor").get<double>();
        p.policy.imaginary_tolerance = po.at("imaginary_tolerance").get<double>();
        p.policy.check_truncation = po.at("check_truncation").get<bool>();
        p.policy.validate_state = po.value("validate_state", true);
        p.policy.model.max_total_dim = po.at("max_total_dim").get<Index>();
        const auto& o = j.at("output");
        p.output.format = result_format_from_string(o.at("format").get<std::string>());
        p.output.timestamp = o.at("timestamp").get<bool>();
        p.annotations = j.at("annotations");
        p.workers = j.value("workers", 1);
        p.checkpoint_interval = j.value("checkpoint_interval", std::size_t{64});
        p.output_stem = j.at("output_stem").get<std::string>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sweep plan: ") + e.what());
    }
}

std::uint64_t SweepPlan::hash() const { return fnv1a64(identity().dump()); }

std::filesystem::path SweepPlan::result_path() const {
    return std::filesystem::path(output_stem.string() + std::string(extension(output.format)));
}

std::filesystem::path SweepPlan::checkpoint_path() const {
    return std::filesystem::path(output_stem.string() + ".ckpt");
}

std::size_t Checkpoint::completed_count() const {
    std::size_t n = 0;
    for (bool b : completed) n += b;
    return n;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    const std::string raw = read_text(path);
    const auto* data = reinterpret_cast<const unsigned char*>(raw.data());
    const std::size_t size = raw.size();

    const std::size_t fixed = kMagic.size() + 4;
    if (size < fixed || std::memcmp(data, kMagic.data(), kMagic.size()) != 0) {
        throw IntegrityError("'" + path.string() + "' is not a checkpoint (bad magic)", -1);
    }
    const auto plan_len = get<std::uint32_t>(data + kMagic.size());
    const std::size_t header_len = fixed + plan_len + 8;
    if (size < header_len + 4) throw IntegrityError("checkpoint header is truncated", -1);
    if (get<std::uint32_t>(data + header_len) != crc32_of(data, header_len)) {
        throw IntegrityError("checkpoint header fails its checksum", -1);
    }

    Checkpoint cp;
    try {
        cp.plan = SweepPlan::from_json(nlohmann::json::parse(raw.substr(fixed, plan_len)));
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("checkpoint plan is unreadable: ") + e.what(), -1);
    }
    cp.plan_hash = get<std::uint64_t>(data + fixed + plan_len);
    if (cp.plan_hash != cp.plan.hash()) throw IntegrityError("checkpoint plan does not match its hash", -1);

    std::size_t n = 1;
    for (const auto& a : cp.plan.axes) n *= a.count;
    cp.completed.assign(n, false);
    cp.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    cp.epsilon = cp.values;
    cp.epsilon_change = cp.values;
    cp.flags.assign(n, PointFlag::Ok);

    std::size_t pos = header_len + 4;
    long long record = 0;
    while (pos < size) {
        const unsigned char tag = data[pos];
        if (tag == kRecordTag) {
            if (size - pos < kRecordSize) {
                cp.truncated_tail = true;  // interrupted mid-write; the point is recomputed
                break;
            }
            if (get<std::uint32_t>(data + pos + kRecordBody) != crc32_of(data + pos, kRecordBody)) {
                throw IntegrityError("checkpoint record " + std::to_string(record) + " fails its checksum", record);
            }
            const auto index = get<std::uint64_t>(data + pos + 1);
            if (index >= n) throw IntegrityError("checkpoint record " + std::to_string(record) + " is out of range", record);
            if (cp.completed[index]) {
                throw IntegrityError("checkpoint record " + std::to_string(record) + " repeats a point", record);
            }
            const auto flag_raw = data[pos + 17];
            if (flag_raw > static_cast<unsigned char>(PointFlag::Failed)) {
                throw IntegrityError("checkpoint record " + std::to_string(record) + " has an unknown flag", record);
            }
            cp.completed[index] = true;
            cp.values[index] = get<double>(data + pos + 9);
            cp.flags[index] = static_cast<PointFlag>(flag_raw);
            cp.epsilon[index] = get<double>(data + pos + 18);
            cp.epsilon_change[index] = get<double>(data + pos + 26);
            ++record;
            pos += kRecordSize;
        } else if (tag == kIndexTag) {
            const std::size_t bits = (n + 7) / 8;
            const std::size_t len = 1 + 8 + bits;
            if (size - pos < len + 4) {
                cp.truncated_tail = true;
                break;
            }
            if (get<std::uint32_t>(data + pos + len) != crc32_of(data + pos, len) ||
                get<std::uint64_t>(data + pos + 1) != n) {
                throw IntegrityError("checkpoint index block is corrupt", record);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const bool set = (data[pos + 9 + i / 8] >> (i % 8)) & 1;
                if (set != cp.completed[i]) throw IntegrityError("checkpoint index disagrees with its records", record);
            }
            cp.finalized = true;
            pos += len + 4;
            if (pos != size) throw IntegrityError("data after the checkpoint index block", record);
        } else {
            throw IntegrityError("checkpoint record " + std::to_string(record) + " has an unknown tag", record);
        }
    }
    cp.records = static_cast<std::size_t>(record);
    return cp;
}

ResultGrid run_sweep(const SweepPlan& plan, const SweepHooks& hooks) {
    plan.validate();
    const auto result_path = plan.result_path();
    const auto ckpt_path = plan.checkpoint_path();
    check_writable(result_path);

    Checkpoint state;
    bool fresh = true;
    if (std::filesystem::exists(ckpt_path)) {
        state = read_checkpoint(ckpt_path);
        if (state.plan_hash != plan.hash()) {
            throw ConfigError("checkpoint '" + ckpt_path.string() + "' belongs to a different plan (hash " +
                              hex64(state.plan_hash) + ", this plan " + hex64(plan.hash()) +
                              "); remove it or choose another output stem");
        }
        fresh = false;
        if (state.truncated_tail) {
            // Drop the partial record so new records start on a boundary.
            const auto header = encode_header(plan).size();
            std::filesystem::resize_file(ckpt_path, header + state.records * kRecordSize);
        }
    } else {
        std::size_t n = 1;
        for (const auto& a : plan.axes) n *= a.count;
        state.plan = plan;
        state.plan_hash = plan.hash();
        state.completed.assign(n, false);
        state.values.assign(n, std::numeric_limits<double>::quiet_NaN());
        state.epsilon = state.values;
        state.epsilon_change = state.values;
        state.flags.assign(n, PointFlag::Ok);
    }

    if (!state.finalized) {
        CheckpointWriter writer(ckpt_path, fresh, plan);
        const ResultGrid shape = ResultGrid::with_axes(grid_axes(plan));
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < state.completed.size(); ++i)
            if (!state.completed[i]) todo.push_back(i);

        std::size_t logged = 0, since_flush = 0;
        bool interrupted = false;
        parallel_for_each_index(
            todo.size(), plan.workers,
            [&](std::size_t k) {
                const std::size_t index = todo[k];
                CorrelationValue v = evaluate_point(plan, shape.coordinates(index));
                if (hooks.on_compute) hooks.on_compute(index);
                return std::pair<std::size_t, CorrelationValue>{index, v};
            },
            [&](std::size_t, std::pair<std::size_t, CorrelationValue>&& item) {
                if (interrupted) return;
                const auto& [index, v] = item;
                const bool ok = v.flag == PointFlag::Ok;
                const double value = ok ? v.value : std::numeric_limits<double>::quiet_NaN();
                const double eps = ok ? v.verdict.epsilon : std::numeric_limits<double>::quiet_NaN();
                const double change = ok ? v.verdict.relative_change : std::numeric_limits<double>::quiet_NaN();
                writer.write(encode_record(index, value, v.flag, eps, change));
                state.completed[index] = true;
                state.values[index] = value;
                state.flags[index] = v.flag;
                state.epsilon[index] = eps;
                state.epsilon_change[index] = change;
                ++logged;
                if (++since_flush >= plan.checkpoint_interval) {
                    writer.flush();
                    since_flush = 0;
                }
                if (hooks.stop_after && logged >= *hooks.stop_after) {
                    writer.flush();
                    interrupted = true;
                    throw SweepInterrupted("sweep stopped after " + std::to_string(logged) + " points");
                }
            });
        writer.write(encode_index(state.completed));
        writer.flush();
    }

    ResultGrid grid = assemble(plan, state);
    write_result(grid, result_path, plan.output);
    return grid;
}

ResultGrid resume(const std::filesystem::path& checkpoint, int workers, const SweepHooks& hooks) {
    Checkpoint cp = read_checkpoint(checkpoint);
    SweepPlan plan = cp.plan;
    if (workers > 0) plan.workers = workers;
    if (plan.checkpoint_path() != checkpoint) {
        // The checkpoint was moved; keep the outputs next to it.
        std::string stem = checkpoint.string();
        if (stem.size() > 5 && stem.ends_with(".ckpt")) stem.resize(stem.size() - 5);
        plan.output_stem = stem;
    }
    return run_sweep(plan, hooks);
}

}  // namespace mollow
