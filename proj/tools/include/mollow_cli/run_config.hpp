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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mollow/correlators.hpp"
#include "mollow/result_io.hpp"
#include "mollow/sweep.hpp"

namespace mollow::cli {

struct SensorConfig {
    double frequency = 0.0;
    double linewidth = 1.0;
    int bundle_order = 1;
};

struct AxisConfig {
    double min = 0.0;
    double max = 0.0;
    std::size_t points = 1;
};

struct RunBlock {
    std::optional<double> epsilon;
    double tolerance = 0.005;
    int max_doublings = 6;
    int max_halvings = 3;
    double noise_floor = 1e-9;
    int workers = 1;
    std::string output = "mollow";
    ResultFormat format = ResultFormat::Csv;
    bool timestamp = true;
    bool check_truncation = false;
    std::size_t checkpoint_interval = 64;
    Index max_total_dim = 4096;
    Normalization normalization = Normalization::Bundle;
};

struct MapBlock {
    AxisConfig u;
    AxisConfig v;
    bool has_v = false;
    std::array<std::size_t, 2> free{0, 1};
    std::vector<double> u_dir, v_dir;  ///< explicit plane directions; empty means `free`
};

struct TauBlock {
    AxisConfig range;
    std::string method = "auto";  ///< auto | rk | expm
};

struct RecommendBlock {
    int branch = 1;
    double margin = 3.0;
    double band = 1.0;
};

/// Parsed and validated configuration file. Frequencies written as
/// {"omega_plus": k} are resolved to k times the triplet splitting.
struct RunConfig {
    SystemParams system;
    std::optional<double> target_splitting;
    std::vector<SensorConfig> sensors;
    RunBlock run;
    std::optional<AxisConfig> scan;
    std::optional<MapBlock> map;
    std::optional<TauBlock> tau;
    RecommendBlock recommend;
    nlohmann::json source;  ///< the file as read

    static RunConfig parse(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);

    /// Everything used in compute, resolved to plain numbers.
    nlohmann::json echo() const;
    EpsilonPolicy policy() const;
    WriteOptions write_options() const;
    CorrelationRequest request() const;
    std::vector<int> partition() const;
};

}  // namespace mollow::cli
