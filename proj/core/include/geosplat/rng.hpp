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

#include <cstdint>
#include <cmath>

#include "geosplat/math.hpp"

namespace geosplat {

// Counter-based random streams: the state is a pure function of
// (seed, stream, counter), so any (pixel, sample) pair draws the same numbers
// regardless of evaluation order or thread count.

inline uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class Rng {
public:
    Rng() = default;
    Rng(uint64_t seed, uint64_t stream) : state_(mix64(mix64(seed) ^ (stream * 0x9e3779b97f4a7c15ull))) {}

    uint64_t next_u64() {
        state_ = state_ * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull;
        return mix64(state_);
    }

    /// Uniform double in [0, 1).
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    Vec2 next_vec2() {
        double a = next_double();
        double b = next_double();
        return {a, b};
    }

    /// Standard normal via Box-Muller.
    double next_normal() {
        double u1 = next_double(), u2 = next_double();
        u1 = std::max(u1, 1e-300);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    uint32_t next_below(uint32_t n) { return uint32_t(next_u64() % n); }

private:
    uint64_t state_ = 0x853c49e6748fea9bull;
};

/// Stream id helper for per-(pixel, sample) reproducibility.
inline uint64_t stream_id(uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    return mix64(a ^ mix64(b ^ mix64(c)));
}

}  // namespace geosplat
