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

#include "mollow/result_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "mollow/errors.hpp"

namespace mollow {

namespace {

constexpr std::string_view kCsvMagic = "# mollow-result 1";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json axes_header(const ResultGrid& grid) {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : grid.axes) axes.push_back({{"name", a.name}, {"unit", a.unit}, {"count", a.values.size()}});
    return axes;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double from_json_number(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::string format_csv(const ResultGrid& grid, bool timestamp) {
    std::string out;
    out += kCsvMagic;
    out += '\n';
    if (timestamp) out += "# timestamp " + utc_timestamp() + "\n";
    out += "# metadata " + grid.metadata.dump() + "\n";
    out += "# axes " + axes_header(grid).dump() + "\n";
    out += "# columns ";
    for (const auto& a : grid.axes) out += a.name + ",";
    out += "value,flag,epsilon,epsilon_change\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (double c : grid.coordinates(i)) {
            out += format_double(c);
            out += ',';
        }
        out += format_double(grid.values[i]);
        out += ',';
        out += to_string(grid.flags[i]);
        out += ',';
        out += format_double(grid.epsilon[i]);
        out += ',';
        out += format_double(grid.epsilon_change[i]);
        out += '\n';
    }
    return out;
}

std::string format_json(const ResultGrid& grid, bool timestamp) {
    nlohmann::json j;
    j["format"] = "mollow-result";
    j["version"] = 1;
    if (timestamp) j["timestamp"] = utc_timestamp();
    j["metadata"] = grid.metadata;
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : grid.axes) axes.push_back({{"name", a.name}, {"unit", a.unit}, {"values", a.values}});
    j["axes"] = axes;
    nlohmann::json values = nlohmann::json::array(), flags = nlohmann::json::array(),
                   eps = nlohmann::json::array(), change = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values.push_back(number_or_null(grid.values[i]));
        flags.push_back(std::string(to_string(grid.flags[i])));
        eps.push_back(number_or_null(grid.epsilon[i]));
        change.push_back(number_or_null(grid.epsilon_change[i]));
    }
    j["values"] = values;
    j["flags"] = flags;
    j["epsilon"] = eps;
    j["epsilon_change"] = change;
    return j.dump(1) + "\n";
}

ResultGrid parse_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("result file is not valid JSON: ") + e.what());
    }
    if (j.value("format", "") != "mollow-result") throw IoError("not a result file");
    try {
        std::vector<Axis> axes;
        for (const auto& a : j.at("axes")) {
            axes.push_back(Axis{a.at("name").get<std::string>(), a.at("unit").get<std::string>(),
                                a.at("values").get<std::vector<double>>()});
        }
        ResultGrid grid = ResultGrid::with_axes(std::move(axes));
        grid.metadata = j.at("metadata");
        const auto& values = j.at("values");
        const auto& flags = j.at("flags");
        const auto& eps = j.at("epsilon");
        const auto& change = j.at("epsilon_change");
        if (values.size() != grid.size() || flags.size() != grid.size() || eps.size() != grid.size() ||
            change.size() != grid.size()) {
            throw IoError("result arrays do not match the axes");
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid.values[i] = from_json_number(values[i]);
            grid.flags[i] = point_flag_from_string(flags[i].get<std::string>());
            grid.epsilon[i] = from_json_number(eps[i]);
            grid.epsilon_change[i] = from_json_number(change[i]);
        }
        return grid;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed result file: ") + e.what());
    }
}

ResultGrid parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvMagic) throw IoError("missing result header");

    nlohmann::json metadata, axes_info;
    bool have_meta = false, have_axes = false, have_columns = false;
    std::vector<std::string> rows;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                if (starts_with(line, "# metadata ")) {
                    metadata = nlohmann::json::parse(line.substr(11));
                    have_meta = true;
                } else if (starts_with(line, "# axes ")) {
                    axes_info = nlohmann::json::parse(line.substr(7));
                    have_axes = true;
                } else if (starts_with(line, "# columns ")) {
                    have_columns = true;
                }
                continue;
            }
            rows.push_back(line);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed result header: ") + e.what());
    }
    if (!have_meta || !have_axes || !have_columns) throw IoError("result header is incomplete");

    std::vector<Axis> axes;
    for (const auto& a : axes_info) {
        const auto count = a.at("count").get<std::size_t>();
        axes.push_back(Axis{a.at("name").get<std::string>(), a.at("unit").get<std::string>(),
                            std::vector<double>(count, kNaN)});
    }
    ResultGrid grid = ResultGrid::with_axes(std::move(axes));
    grid.metadata = std::move(metadata);
    if (rows.size() != grid.size()) {
        throw IoError("result body has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(grid.size()));
    }
    const std::size_t rank = grid.axes.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto cells = split(rows[i], ',');
        if (cells.size() != rank + 4) throw IoError("row " + std::to_string(i) + " has the wrong number of columns");
        const auto idx = grid.multi_index(i);
        for (std::size_t k = 0; k < rank; ++k) {
            const double c = parse_double(cells[k]);
            double& slot = grid.axes[k].values[idx[k]];
            if (std::isnan(slot)) {
                slot = c;
            } else if (slot != c) {
                throw IoError("row " + std::to_string(i) + " breaks the grid layout");
            }
        }
        grid.values[i] = parse_double(cells[rank]);
        grid.flags[i] = point_flag_from_string(cells[rank + 1]);
        grid.epsilon[i] = parse_double(cells[rank + 2]);
        grid.epsilon_change[i] = parse_double(cells[rank + 3]);
    }
    return grid;
}

}  // namespace

ResultFormat result_format_from_string(std::string_view name) {
    if (name == "csv") return ResultFormat::Csv;
    if (name == "json") return ResultFormat::Json;
    throw ConfigError("unknown result format '" + std::string(name) + "' (expected csv or json)");
}

std::string_view to_string(ResultFormat format) { return format == ResultFormat::Csv ? "csv" : "json"; }

std::string_view extension(ResultFormat format) { return format == ResultFormat::Csv ? ".csv" : ".json"; }

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    if (text == "nan") return kNaN;
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw IoError("cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

std::string format_result(const ResultGrid& grid, const WriteOptions& options) {
    grid.check_consistent();
    return options.format == ResultFormat::Csv ? format_csv(grid, options.timestamp)
                                               : format_json(grid, options.timestamp);
}

ResultGrid parse_result(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') return parse_json(text);
    return parse_csv(text);
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_result(const ResultGrid& grid, const std::filesystem::path& path, const WriteOptions& options) {
    write_text(path, format_result(grid, options));
}

ResultGrid read_result(const std::filesystem::path& path) { return parse_result(read_text(path)); }

std::string format_overlay(const Overlay& overlay, const ResultGrid& grid) {
    nlohmann::json j;
    j["format"] = "mollow-overlay";
    j["version"] = 1;
    nlohmann::json names = nlohmann::json::array();
    for (const auto& a : grid.axes) names.push_back(a.name);
    j["axes"] = names;
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : overlay.lines) {
        nlohmann::json rec = {{"label", l.condition.label()},
                              {"coefficients", l.condition.coefficients},
                              {"branch", l.condition.branch},
                              {"delta", l.condition.delta},
                              {"skipped", l.skipped}};
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : l.points) pts.push_back(grid.axes.size() == 2 ? nlohmann::json{p[0], p[1]} : nlohmann::json{p[0]});
        rec["points"] = pts;
        if (!l.note.empty()) rec["note"] = l.note;
        lines.push_back(rec);
    }
    j["lines"] = lines;
    return j.dump(1) + "\n";
}

void write_overlay(const Overlay& overlay, const ResultGrid& grid, const std::filesystem::path& path) {
    write_text(path, format_overlay(overlay, grid));
}

}  // namespace mollow
