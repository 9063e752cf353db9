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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mollow {

/// Reason attached to every grid value. Anything but Ok carries a NaN value.
enum class PointFlag : std::uint8_t {
    Ok = 0,
    ZeroDenominator = 1,  ///< a normalizing moment vanishes (e.g. undriven emitter)
    Precision = 2,
    Convergence = 3,
    Solver = 4,
    Regime = 5,
    Propagation = 6,
    Failed = 7,  ///< any other per-point error
};

std::string_view to_string(PointFlag flag);
PointFlag point_flag_from_string(std::string_view name);

struct Axis {
    std::string name;
    std::string unit;
    std::vector<double> values;
};

/// Row-major grid (axis 0 slowest). Besides the value, every point records the
/// sensor coupling it was accepted at and the relative change of the value
/// under halving that coupling (NaN where not applicable).
struct ResultGrid {
    std::vector<Axis> axes;
    std::vector<double> values;
    std::vector<PointFlag> flags;
    std::vector<double> epsilon;
    std::vector<double> epsilon_change;
    nlohmann::json metadata = nlohmann::json::object();

    /// Allocates storage for the product of the axis lengths (values NaN, flags Ok).
    static ResultGrid with_axes(std::vector<Axis> axes);

    std::size_t size() const { return values.size(); }
    std::vector<std::size_t> shape() const;
    std::size_t flat_index(std::span<const std::size_t> index) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;
    /// Coordinates of a flat point, one per axis.
    std::vector<double> coordinates(std::size_t flat) const;

    void set(std::size_t flat, double value, PointFlag flag, double eps, double change);
    void set_failure(std::size_t flat, PointFlag flag);

    /// Throws LayoutError if the per-point arrays disagree with the axes.
    void check_consistent() const;
};

/// Linearly spaced points, endpoints included. count == 1 gives {lo}.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace mollow
