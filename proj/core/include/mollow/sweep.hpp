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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mollow/correlators.hpp"
#include "mollow/result_io.hpp"

namespace mollow {

enum class SweepKind {
    Spectrum,         ///< one axis: sensor frequency; normalized at the end
    Autocorrelation,  ///< one axis: sensor frequency of a single N-photon sensor
    Map,              ///< one or two axes through `plane`: zero-delay correlator
};

struct SweepAxis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 1;

    std::vector<double> values() const { return linspace(min, max, count); }
};

struct SweepPlan {
    SweepKind kind = SweepKind::Map;
    SystemParams system;
    /// Template request. Spectrum uses linewidths[0]; Autocorrelation uses
    /// partition[0] as the order and linewidths[0].
    CorrelationRequest request;
    PlaneSpec plane;  ///< Map only
    std::vector<SweepAxis> axes;
    EpsilonPolicy policy;
    int workers = 1;
    std::size_t checkpoint_interval = 64;
    std::filesystem::path output_stem;
    WriteOptions output;
    /// Extra record copied verbatim into the result metadata (e.g. a config echo).
    nlohmann::json annotations = nlohmann::json::object();

    void validate() const;
    /// Everything that determines the numbers and the output bytes. Worker
    /// count, checkpoint interval and paths are left out.
    nlohmann::json identity() const;
    nlohmann::json to_json() const;
    static SweepPlan from_json(const nlohmann::json& j);
    std::uint64_t hash() const;

    std::filesystem::path result_path() const;
    std::filesystem::path checkpoint_path() const;
};

/// Checkpoint file: "MCKP1" header, the plan (JSON) and its hash, then an
/// append-only log of (index, value, flag, epsilon, change) records, each with
/// its own CRC-32, and finally an index block once the sweep completes.
struct Checkpoint {
    SweepPlan plan;
    std::uint64_t plan_hash = 0;
    std::vector<bool> completed;
    std::vector<double> values, epsilon, epsilon_change;
    std::vector<PointFlag> flags;
    bool finalized = false;
    std::size_t records = 0;
    bool truncated_tail = false;  ///< a partial trailing record was ignored

    std::size_t completed_count() const;
};

/// Reads and verifies a checkpoint; throws IntegrityError naming the first bad record.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Testing hooks. `on_compute` runs once per evaluated point (from the worker);
/// `stop_after` aborts with SweepInterrupted after that many points were logged.
struct SweepHooks {
    std::function<void(std::size_t)> on_compute;
    std::optional<std::size_t> stop_after;
};

class SweepInterrupted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluates every point of the plan exactly once (resuming from a matching
/// checkpoint), writes the result file, and returns the grid.
ResultGrid run_sweep(const SweepPlan& plan, const SweepHooks& hooks = {});

/// Continues the sweep stored in a checkpoint. `workers` overrides the stored count when > 0.
ResultGrid resume(const std::filesystem::path& checkpoint, int workers = 0, const SweepHooks& hooks = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mollow
