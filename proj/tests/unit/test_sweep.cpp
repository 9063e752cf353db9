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

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include "mollow/errors.hpp"
#include "mollow/result_io.hpp"
#include "mollow/sweep.hpp"

using namespace mollow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("mollow_sweep_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SweepPlan small_map(const fs::path& stem) {
    SweepPlan plan;
    plan.kind = SweepKind::Map;
    plan.system = {0.0, 5.0, 1.0};
    plan.request.partition = {1, 1};
    plan.request.frequencies = {0.0, 0.0};
    plan.request.linewidths = {1.0, 1.0};
    plan.plane = PlaneSpec::free_pair(2, 0, 1, std::vector<double>{0.0, 0.0});
    plan.axes = {SweepAxis{"omega1", -12.0, 12.0, 3}, SweepAxis{"omega2", -12.0, 12.0, 3}};
    plan.output_stem = stem;
    plan.output = {ResultFormat::Csv, false};
    plan.checkpoint_interval = 2;
    return plan;
}

std::string slurp(const fs::path& p) { return read_text(p); }

// Counts evaluations per grid index, across threads.
struct Counter {
    std::mutex m;
    std::map<std::size_t, int> hits;
    SweepHooks hooks(std::optional<std::size_t> stop = {}) {
        SweepHooks h;
        h.on_compute = [this](std::size_t i) {
            std::lock_guard lock(m);
            ++hits[i];
        };
        h.stop_after = stop;
        return h;
    }
    int total() {
        int n = 0;
        for (auto& [_, c] : hits) n += c;
        return n;
    }
};

}  // namespace

TEST_CASE("worker count does not change the output bytes") {
    TempDir dir("workers");
    SweepPlan one = small_map(dir.path / "one");
    SweepPlan four = small_map(dir.path / "four");
    four.workers = 4;
    CHECK(one.hash() == four.hash());
    run_sweep(one);
    run_sweep(four);
    CHECK(slurp(one.result_path()) == slurp(four.result_path()));
    const ResultGrid g = read_result(one.result_path());
    CHECK(g.size() == 9);
    for (auto f : g.flags) CHECK(f == PointFlag::Ok);
}

TEST_CASE("interrupted sweep resumes to the same file without recomputing") {
    TempDir dir("resume");
    SweepPlan full = small_map(dir.path / "full");
    run_sweep(full);

    SweepPlan part = small_map(dir.path / "part");
    Counter counter;
    CHECK_THROWS_AS(run_sweep(part, counter.hooks(4)), SweepInterrupted);
    CHECK(fs::exists(part.checkpoint_path()));
    CHECK_FALSE(fs::exists(part.result_path()));
    const Checkpoint cp = read_checkpoint(part.checkpoint_path());
    CHECK(cp.completed_count() == 4);
    CHECK_FALSE(cp.finalized);

    const ResultGrid resumed = resume(part.checkpoint_path(), 1, counter.hooks());
    CHECK(counter.total() == 9);
    for (const auto& [index, hits] : counter.hits) CHECK_MESSAGE(hits == 1, "index " << index);
    CHECK(slurp(part.result_path()) == slurp(full.result_path()));
    CHECK(resumed.size() == 9);
    CHECK(read_checkpoint(part.checkpoint_path()).finalized);
}

TEST_CASE("resuming a complete checkpoint only re-emits the file") {
    TempDir dir("complete");
    SweepPlan plan = small_map(dir.path / "done");
    run_sweep(plan);
    const std::string before = slurp(plan.result_path());
    fs::remove(plan.result_path());
    Counter counter;
    resume(plan.checkpoint_path(), 0, counter.hooks());
    CHECK(counter.total() == 0);
    CHECK(slurp(plan.result_path()) == before);
}

TEST_CASE("a checkpoint from a different plan is refused") {
    TempDir dir("edited");
    SweepPlan plan = small_map(dir.path / "p");
    Counter counter;
    CHECK_THROWS_AS(run_sweep(plan, counter.hooks(2)), SweepInterrupted);
    SweepPlan edited = plan;
    edited.system.rabi = 5.5;
    CHECK(edited.hash() != plan.hash());
    CHECK_THROWS_AS(run_sweep(edited), ConfigError);
    // Worker count and flush interval are not part of the plan identity.
    SweepPlan same = plan;
    same.workers = 3;
    same.checkpoint_interval = 7;
    CHECK_NOTHROW(run_sweep(same));
}

TEST_CASE("corrupt records are reported by index") {
    TempDir dir("corrupt");
    SweepPlan plan = small_map(dir.path / "c");
    run_sweep(plan);
    const fs::path ck = plan.checkpoint_path();
    std::string bytes = slurp(ck);
    const std::size_t record = 38;
    const std::size_t body = bytes.size() - (1 + 8 + 2 + 4) - 9 * record;  // header length
    bytes[body + 5 * record + 12] ^= 0x40;                                  // inside record 5's value
    write_text(ck, bytes);
    try {
        read_checkpoint(ck);
        FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
        CHECK(e.record_index() == 5);
    }
    CHECK_THROWS_AS(resume(ck), IntegrityError);

    write_text(ck, "not a checkpoint");
    CHECK_THROWS_AS(read_checkpoint(ck), IntegrityError);
}

TEST_CASE("a torn trailing record is dropped and recomputed") {
    TempDir dir("torn");
    SweepPlan full = small_map(dir.path / "full");
    run_sweep(full);

    SweepPlan plan = small_map(dir.path / "t");
    plan.checkpoint_interval = 1;
    Counter first;
    CHECK_THROWS_AS(run_sweep(plan, first.hooks(5)), SweepInterrupted);
    const fs::path ck = plan.checkpoint_path();
    fs::resize_file(ck, fs::file_size(ck) - 10);
    const Checkpoint cp = read_checkpoint(ck);
    CHECK(cp.truncated_tail);
    CHECK(cp.completed_count() == 4);
    Counter counter;
    resume(ck, 2, counter.hooks());
    CHECK(counter.total() == 5);
    CHECK(slurp(plan.result_path()) == slurp(full.result_path()));
}

TEST_CASE("unwritable output fails before any compute") {
    SweepPlan plan = small_map("/nonexistent_mollow_dir/sub/out");
    Counter counter;
    CHECK_THROWS_AS(run_sweep(plan, counter.hooks()), IoError);
    CHECK(counter.total() == 0);
}

TEST_CASE("spectrum sweep equals the direct scan") {
    TempDir dir("spectrum");
    SweepPlan plan;
    plan.kind = SweepKind::Spectrum;
    plan.system = {0.0, 5.0, 1.0};
    plan.request.partition = {1};
    plan.request.frequencies = {0.0};
    plan.request.linewidths = {1.0};
    const double wp = dressed_splitting(plan.system).omega_plus;
    plan.axes = {SweepAxis{"omega", -2 * wp, 2 * wp, 201}};
    plan.output_stem = dir.path / "s";
    plan.workers = 2;
    plan.checkpoint_interval = 50;
    const ResultGrid swept = run_sweep(plan);
    const ResultGrid direct = spectrum_scan(plan.system, 1.0, plan.axes[0].values());
    REQUIRE(swept.size() == direct.size());
    for (std::size_t i = 0; i < swept.size(); ++i) CHECK(swept.values[i] == direct.values[i]);
}

TEST_CASE("per-point failures are flagged, not fatal") {
    TempDir dir("flags");
    SweepPlan plan = small_map(dir.path / "z");
    plan.system.rabi = 0.0;
    const ResultGrid g = run_sweep(plan);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::isnan(g.values[i]));
        CHECK(g.flags[i] == PointFlag::ZeroDenominator);
    }
    CHECK(slurp(plan.result_path()).find("zero_denominator") != std::string::npos);
}

TEST_CASE("plan validation") {
    SweepPlan plan = small_map("x");
    plan.axes[1].name = "omega1";
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan = small_map("x");
    plan.axes[0].count = 0;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan = small_map("x");
    plan.workers = 0;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan = small_map("x");
    plan.policy.model.max_total_dim = 4;
    CHECK_THROWS_AS(plan.validate(), CapacityError);
    plan = small_map("x");
    CHECK(SweepPlan::from_json(plan.to_json()).hash() == plan.hash());
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
