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

#include <filesystem>
#include <string>
#include <string_view>

#include "mollow/leapfrog.hpp"
#include "mollow/result_grid.hpp"

namespace mollow {

enum class ResultFormat { Csv, Json };

ResultFormat result_format_from_string(std::string_view name);
std::string_view to_string(ResultFormat format);
/// ".csv" or ".json"
std::string_view extension(ResultFormat format);

struct WriteOptions {
    ResultFormat format = ResultFormat::Csv;
    /// Adds a wall-clock timestamp line. The metadata record itself never
    /// carries it, so files written without it are reproducible byte for byte.
    bool timestamp = true;
};

/// CSV layout:
///   # mollow-result 1
///   # timestamp <ISO-8601 UTC>            (optional)
///   # metadata <single-line JSON>
///   # columns <axis names...>,value,flag,epsilon,epsilon_change
///   one row per point, slow axis first
/// Numbers use the shortest representation that reads back exactly; NaN is "nan".
/// JSON layout: one object with the same content; NaN is null.
std::string format_result(const ResultGrid& grid, const WriteOptions& options = {});
ResultGrid parse_result(std::string_view text);

void write_result(const ResultGrid& grid, const std::filesystem::path& path, const WriteOptions& options = {});
ResultGrid read_result(const std::filesystem::path& path);

/// Overlay sidecar: JSON object with the grid's axis names and one record per
/// condition (label, coefficients, branch, delta, polyline points, skip note).
std::string format_overlay(const Overlay& overlay, const ResultGrid& grid);
void write_overlay(const Overlay& overlay, const ResultGrid& grid, const std::filesystem::path& path);

/// Writes `content` to `path`, throwing IoError on failure.
void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace mollow
