/*
 * stackselect : motion assessment and reference stack selection
 *
 * Copyright 2026 the stackselect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stackselect/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace stackselect {

int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("STACKSELECT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<int>(std::min<long>(v, hw));
    }
    return hw;
}

namespace {

// Chunk boundaries depend only on n, never on the worker count, so the
// per-chunk results (and any reduction over them) are reproducible.
constexpr std::size_t kChunk = 1 << 14;

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t chunks = chunk_count(n);
    const int workers = std::min<std::size_t>(worker_count(), chunks);
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            std::size_t lo = c * kChunk;
            body(lo, std::min(lo + kChunk, n));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

double deterministic_sum(std::size_t n,
                         const std::function<double(std::size_t, std::size_t)>& chunk_sum) {
    if (n == 0) return 0.0;
    const std::size_t chunks = chunk_count(n);
    std::vector<double> partial(chunks, 0.0);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        // parallel_for hands out whole chunks, so lo / kChunk is exact.
        partial[lo / kChunk] = chunk_sum(lo, hi);
    });
    double acc = 0.0;
    for (double p : partial) acc += p;
    return acc;
}

}  // namespace stackselect
