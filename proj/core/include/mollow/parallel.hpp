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

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mollow {

/// Runs fn(i) for i in [0, count) on `workers` threads pulling indices from a
/// shared counter, and hands each result to `sink(i, result)` under a single
/// lock. The first exception thrown by fn stops the pool and is rethrown.
template <class Fn, class Sink>
void parallel_for_each_index(std::size_t count, int workers, Fn&& fn, Sink&& sink) {
    const std::size_t n_threads = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex sink_mutex;
    std::exception_ptr failure;

    auto work = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                auto result = fn(i);
                std::lock_guard lock(sink_mutex);
                sink(i, std::move(result));
            } catch (...) {
                std::lock_guard lock(sink_mutex);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };

    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
}

/// Ordered map over indices: out[i] = fn(i), independent of scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, int workers, Fn&& fn) {
    std::vector<T> out(count);
    parallel_for_each_index(count, workers, std::forward<Fn>(fn), [&](std::size_t i, T&& v) { out[i] = std::move(v); });
    return out;
}

}  // namespace mollow
