/*
 * Copyright (C) 2025 The geosplat authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "geosplat/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace geosplat {

namespace {
std::atomic<int> g_thread_count{-1};

int resolve_thread_count() {
    int n = g_thread_count.load();
    if (n < 0) {
        if (const char* env = std::getenv("GEOSPLAT_THREADS")) {
            n = std::atoi(env);
        } else {
            n = 0;
        }
    }
    if (n <= 0) n = int(std::thread::hardware_concurrency());
    return n > 0 ? n : 1;
}
}  // namespace

void set_thread_count(int n) { g_thread_count.store(n); }

int thread_count() { return resolve_thread_count(); }

void parallel_for_chunked(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    int workers = resolve_thread_count();
    if (workers <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    // Static chunking; atomically claimed so stragglers do not stall the pool.
    const size_t chunk = std::max<size_t>(1, n / (size_t(workers) * 8));
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            size_t begin = next.fetch_add(chunk);
            if (begin >= n) break;
            fn(begin, std::min(begin + chunk, n));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers) - 1);
    for (int i = 1; i < workers; i++) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    parallel_for_chunked(n, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; i++) fn(i);
    });
}

}  // namespace geosplat
