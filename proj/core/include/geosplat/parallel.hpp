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

#pragma once

#include <cstddef>
#include <functional>

namespace geosplat {

/// Worker count used by parallel_for. 0 means hardware concurrency.
/// Resolution order: explicit set_thread_count() > GEOSPLAT_THREADS env > hardware.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n). Work items must write to disjoint state;
/// results are then independent of the thread count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

/// Chunked variant: fn(begin, end) over contiguous ranges.
void parallel_for_chunked(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace geosplat
