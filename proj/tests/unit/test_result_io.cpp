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

#include <cmath>
#include <filesystem>
#include <limits>

#include "mollow/errors.hpp"
#include "mollow/result_io.hpp"

using namespace mollow;

namespace {

ResultGrid sample_grid() {
    ResultGrid g = ResultGrid::with_axes({Axis{"omega1", "gamma", {-1.5, 0.1, 1.0 / 3.0}},
                                          Axis{"omega2", "gamma", {2.0, 1e-300}}});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < g.size(); ++i) g.set(i, 1.0 / (i + 7.0), PointFlag::Ok, 0.025 * (i + 1), 1e-5 * i);
    g.set_failure(3, PointFlag::ZeroDenominator);
    g.set(4, 123456.789e10, PointFlag::Ok, 0.05, nan);
    g.metadata = {{"kind", "map"}, {"system", {{"rabi", 5.0}}}, {"note", "commas, \"quotes\" and\nnewlines"}};
    return g;
}

void check_same(const ResultGrid& a, const ResultGrid& b) {
    REQUIRE(a.axes.size() == b.axes.size());
    for (std::size_t k = 0; k < a.axes.size(); ++k) {
        CHECK(a.axes[k].name == b.axes[k].name);
        CHECK(a.axes[k].unit == b.axes[k].unit);
        CHECK(a.axes[k].values == b.axes[k].values);
    }
    REQUIRE(a.size() == b.size());
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same(a.values[i], b.values[i]));
        CHECK(a.flags[i] == b.flags[i]);
        CHECK(same(a.epsilon[i], b.epsilon[i]));
        CHECK(same(a.epsilon_change[i], b.epsilon_change[i]));
    }
    CHECK(a.metadata == b.metadata);
}

}  // namespace

TEST_CASE("result files round-trip exactly") {
    const ResultGrid g = sample_grid();
    for (ResultFormat f : {ResultFormat::Csv, ResultFormat::Json}) {
        for (bool ts : {true, false}) {
            const std::string text = format_result(g, {f, ts});
            check_same(g, parse_result(text));
            CHECK((text.find("timestamp") != std::string::npos) == ts);
        }
    }
}

TEST_CASE("csv layout: header comments, slow axis first") {
    const std::string text = format_result(sample_grid(), {ResultFormat::Csv, false});
    CHECK(text.rfind("# mollow-result 1\n# metadata ", 0) == 0);
    CHECK(text.find("# columns omega1,omega2,value,flag,epsilon,epsilon_change\n") != std::string::npos);
    CHECK(text.find("\n-1.5,2,") != std::string::npos);
    CHECK(text.find("\n-1.5,1e-300,") != std::string::npos);
    CHECK(text.find("zero_denominator") != std::string::npos);
    CHECK(text.find("\n0.1,1e-300,nan,zero_denominator,nan,nan\n") != std::string::npos);
}

TEST_CASE("files on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "mollow_io_test";
    std::filesystem::create_directories(dir);
    const ResultGrid g = sample_grid();
    write_result(g, dir / "r.json", {ResultFormat::Json, false});
    check_same(g, read_result(dir / "r.json"));
    CHECK_THROWS_AS(read_result(dir / "missing.csv"), IoError);
    CHECK_THROWS_AS(write_result(g, dir / "no" / "such" / "dir.csv", {}), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(parse_result("hello"), IoError);
    CHECK_THROWS_AS(parse_result("{\"format\":\"other\"}"), IoError);
    std::string text = format_result(sample_grid(), {ResultFormat::Csv, false});
    text.pop_back();
    text.erase(text.rfind('\n'));  // drop the last row
    CHECK_THROWS_AS(parse_result(text), IoError);
    CHECK_THROWS_AS(result_format_from_string("xml"), ConfigError);
}

TEST_CASE("number formatting is shortest round-trip") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 5e-324}) CHECK(parse_double(format_double(x)) == x);
    CHECK(format_double(0.5) == "0.5");
    CHECK(std::isnan(parse_double("nan")));
    CHECK_THROWS_AS(parse_double("1.0x"), IoError);
}

TEST_CASE("grid indexing") {
    const ResultGrid g = sample_grid();
    CHECK(g.shape() == std::vector<std::size_t>{3, 2});
    CHECK(g.flat_index(std::vector<std::size_t>{2, 1}) == 5);
    CHECK(g.multi_index(3) == std::vector<std::size_t>{1, 1});
    CHECK(g.coordinates(3) == std::vector<double>{0.1, 1e-300});
    CHECK(linspace(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
    CHECK(point_flag_from_string("precision") == PointFlag::Precision);
}
