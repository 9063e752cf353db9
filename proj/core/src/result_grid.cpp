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

#include "mollow/result_grid.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "mollow/errors.hpp"

namespace mollow {

namespace {

constexpr std::array<std::string_view, 8> kFlagNames{
    "ok", "zero_denominator", "precision", "convergence", "solver", "regime", "propagation", "failed"};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string_view to_string(PointFlag flag) {
    const auto i = static_cast<std::size_t>(flag);
    return i < kFlagNames.size() ? kFlagNames[i] : "failed";
}

PointFlag point_flag_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kFlagNames.size(); ++i)
        if (kFlagNames[i] == name) return static_cast<PointFlag>(i);
    throw ParameterError("unknown point flag '" + std::string(name) + "'");
}

ResultGrid ResultGrid::with_axes(std::vector<Axis> axes) {
    if (axes.empty()) throw LayoutError("a result grid needs at least one axis");
    std::size_t n = 1;
    for (const auto& a : axes) {
        if (a.values.empty()) throw LayoutError("axis '" + a.name + "' is empty");
        n *= a.values.size();
    }
    ResultGrid g;
    g.axes = std::move(axes);
    g.values.assign(n, kNaN);
    g.flags.assign(n, PointFlag::Ok);
    g.epsilon.assign(n, kNaN);
    g.epsilon_change.assign(n, kNaN);
    return g;
}

std::vector<std::size_t> ResultGrid::shape() const {
    std::vector<std::size_t> s;
    for (const auto& a : axes) s.push_back(a.values.size());
    return s;
}

std::size_t ResultGrid::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != axes.size()) throw LayoutError("index rank does not match grid rank");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        if (index[k] >= axes[k].values.size()) throw LayoutError("grid index out of range");
        flat = flat * axes[k].values.size() + index[k];
    }
    return flat;
}

std::vector<std::size_t> ResultGrid::multi_index(std::size_t flat) const {
    if (flat >= values.size()) throw LayoutError("flat index out of range");
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        idx[k] = flat % axes[k].values.size();
        flat /= axes[k].values.size();
    }
    return idx;
}

std::vector<double> ResultGrid::coordinates(std::size_t flat) const {
    const auto idx = multi_index(flat);
    std::vector<double> c(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) c[k] = axes[k].values[idx[k]];
    return c;
}

void ResultGrid::set(std::size_t flat, double value, PointFlag flag, double eps, double change) {
    values.at(flat) = flag == PointFlag::Ok ? value : kNaN;
    flags.at(flat) = flag;
    epsilon.at(flat) = eps;
    epsilon_change.at(flat) = change;
}

void ResultGrid::set_failure(std::size_t flat, PointFlag flag) { set(flat, kNaN, flag, kNaN, kNaN); }

void ResultGrid::check_consistent() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    if (axes.empty() || values.size() != n || flags.size() != n || epsilon.size() != n || epsilon_change.size() != n) {
        throw LayoutError("result grid arrays do not match its axes");
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count == 0) throw ParameterError("linspace needs at least one point");
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = lo + step * static_cast<double>(i);
    v.back() = hi;
    return v;
}

}  // namespace mollow
