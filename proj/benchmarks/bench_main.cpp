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

#include <benchmark/benchmark.h>

#include "mollow/correlators.hpp"
#include "mollow/steady_state.hpp"
#include "mollow/system_model.hpp"

using namespace mollow;

namespace {

SystemParams detuned() { return {200.0, drive_for_target_splitting(300.0, 200.0), 1.0}; }

CorrelationRequest request(std::vector<int> partition, std::vector<double> frequencies, double linewidth) {
    CorrelationRequest r;
    r.linewidths.assign(partition.size(), linewidth);
    r.partition = std::move(partition);
    r.frequencies = std::move(frequencies);
    return r;
}

// Steady state of the emitter plus sensors; range(0) is the sensor count.
void BM_SteadyState(benchmark::State& state) {
    std::vector<SensorSpec> sensors(static_cast<std::size_t>(state.range(0)), SensorSpec{150.0, 5.0, 1, 0});
    const CompositeModel model = build_model(detuned(), sensors, 0.05);
    const Liouvillian l = model.liouvillian();
    for (auto _ : state) benchmark::DoNotOptimize(solve_steady_state_detailed(l));
    state.counters["dim"] = static_cast<double>(model.layout.total_dim());
}
BENCHMARK(BM_SteadyState)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_SpectrumPoint(benchmark::State& state) {
    const SystemParams p{0.0, 5.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(spectrum_point(p, 1.0, 9.9));
}
BENCHMARK(BM_SpectrumPoint)->Unit(benchmark::kMicrosecond);

void BM_ZeroDelayPair(benchmark::State& state) {
    const CorrelationRequest r = request({1, 1}, {150.0, 150.0}, 5.0);
    for (auto _ : state) benchmark::DoNotOptimize(g_zero_delay(detuned(), r));
}
BENCHMARK(BM_ZeroDelayPair)->Unit(benchmark::kMicrosecond);

void BM_ZeroDelayHeralded(benchmark::State& state) {
    const CorrelationRequest r = request({2, 1}, {-100.0, 500.0}, 5.0);
    for (auto _ : state) benchmark::DoNotOptimize(g_zero_delay(detuned(), r));
}
BENCHMARK(BM_ZeroDelayHeralded)->Unit(benchmark::kMicrosecond);

// Map throughput: range(0) x range(0) grid of the heralded correlator.
void BM_PlaneMap(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorrelationRequest r = request({2, 1}, {0.0, 0.0}, 5.0);
    const PlaneSpec plane = PlaneSpec::free_pair(2, 0, 1, std::vector<double>{0.0, 0.0});
    const Axis u{"omega1", "gamma", linspace(-360.0, 360.0, n)};
    const Axis v{"omega2", "gamma", linspace(-360.0, 360.0, n)};
    for (auto _ : state) benchmark::DoNotOptimize(plane_map(detuned(), r, plane, u, v));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}
BENCHMARK(BM_PlaneMap)->Arg(5)->Arg(11)->Unit(benchmark::kMillisecond);

void BM_TauTrace(benchmark::State& state) {
    CorrelationRequest r = request({1, 1}, {150.0, 150.0}, 5.0);
    r.tau = linspace(-2.0, 2.0, 81);
    PropagationOptions opts;
    opts.method = state.range(0) ? PropagationMethod::MatrixExponential : PropagationMethod::RungeKutta;
    for (auto _ : state) benchmark::DoNotOptimize(g_tau(detuned(), r, {}, opts));
}
BENCHMARK(BM_TauTrace)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
