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

#include "geosplat/image.hpp"

#include <cassert>
#include <stdexcept>

namespace geosplat {

double mean_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mean_abs_diff: shape mismatch");
    if (a.size() == 0) return 0;
    double s = 0;
    for (size_t i = 0; i < a.size(); i++) s += std::abs(a.raw()[i] - b.raw()[i]);
    return s / double(a.size());
}

double mean_squared_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mean_squared_diff: shape mismatch");
    if (a.size() == 0) return 0;
    double s = 0;
    for (size_t i = 0; i < a.size(); i++) {
        double d = a.raw()[i] - b.raw()[i];
        s += d * d;
    }
    return s / double(a.size());
}

double relative_rmse(const Image& a, const Image& ref, const Image* mask) {
    if (!a.same_shape(ref)) throw std::invalid_argument("relative_rmse: shape mismatch");
    double sq = 0, norm = 0;
    size_t count = 0;
    for (int y = 0; y < a.height(); y++) {
        for (int x = 0; x < a.width(); x++) {
            if (mask && mask->at(y, x) == 0) continue;
            for (int c = 0; c < a.channels(); c++) {
                double d = a.at(y, x, c) - ref.at(y, x, c);
                sq += d * d;
                norm += std::abs(ref.at(y, x, c));
                count++;
            }
        }
    }
    if (count == 0) return 0;
    double rms = std::sqrt(sq / double(count));
    double mean_ref = norm / double(count);
    return mean_ref > 0 ? rms / mean_ref : rms;
}

Image to_luminance(const Image& src) {
    Image out(src.width(), src.height(), 1);
    for (int y = 0; y < src.height(); y++)
        for (int x = 0; x < src.width(); x++) {
            double s = 0;
            for (int c = 0; c < src.channels(); c++) s += src.at(y, x, c);
            out.at(y, x) = s / src.channels();
        }
    return out;
}

}  // namespace geosplat
