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

#include <cmath>
#include <cstddef>
#include <vector>

#include "geosplat/math.hpp"

namespace geosplat {

/// Dense H x W x C buffer of linear radiance (or any per-pixel scalars).
/// Row-major, pixel (0,0) at the top-left.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0)
        : width_(width), height_(height), channels_(channels),
          data_(size_t(width) * height * channels, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int y, int x, int c = 0) { return data_[(size_t(y) * width_ + x) * channels_ + c]; }
    double at(int y, int x, int c = 0) const {
        return data_[(size_t(y) * width_ + x) * channels_ + c];
    }

    Vec3 pixel3(int y, int x) const {
        size_t i = (size_t(y) * width_ + x) * channels_;
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set_pixel3(int y, int x, const Vec3& v) {
        size_t i = (size_t(y) * width_ + x) * channels_;
        data_[i] = v.x;
        data_[i + 1] = v.y;
        data_[i + 2] = v.z;
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Image& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

private:
    int width_ = 0, height_ = 0, channels_ = 0;
    std::vector<double> data_;
};

/// Mean absolute difference over all samples of two same-shape images.
double mean_abs_diff(const Image& a, const Image& b);

/// Mean squared difference over all samples.
double mean_squared_diff(const Image& a, const Image& b);

/// Root-mean-square difference divided by the mean absolute value of `ref`
/// (over pixels where mask, if given, is nonzero). Used for "within x% RMSE".
double relative_rmse(const Image& a, const Image& ref, const Image* mask = nullptr);

/// Channel-wise luminance reduction (Rec.709-free simple mean) to 1 channel.
Image to_luminance(const Image& src);

}  // namespace geosplat
