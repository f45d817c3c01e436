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

#include <array>
#include <string>
#include <vector>

#include "geosplat/brdf.hpp"
#include "geosplat/math.hpp"
#include "geosplat/rng.hpp"

namespace geosplat {

inline constexpr int kMaterialChannels = 5;  // albedo rgb, roughness, metalness

/// Spatially varying PBR attribute field: a sum of dense trilinear grids at
/// increasing resolutions holding 5 raw channels, squashed by a per-channel
/// logistic so queries always satisfy the material box constraints. Linear in
/// its parameters up to the final activation, which keeps the parameter
/// gradients exact.
class MaterialField {
public:
    MaterialField() = default;
    MaterialField(const Box3& bounds, const std::vector<int>& level_resolutions,
                  double initial_raw = 0.0);

    /// Field over the mesh bounding box padded by 5%, levels 16/32/64.
    static MaterialField for_bounds(const Box3& bounds);

    const Box3& bounds() const { return bounds_; }
    int level_count() const { return int(levels_.size()); }
    int level_resolution(int level) const { return levels_[size_t(level)].resolution; }

    size_t parameter_count() const { return parameters_.size(); }
    double* parameters() { return parameters_.data(); }
    const double* parameters() const { return parameters_.data(); }
    std::vector<double>& parameter_vector() { return parameters_; }
    const std::vector<double>& parameter_vector() const { return parameters_; }

    /// Flat parameter index of channel c at node (x,y,z) of a level.
    size_t parameter_index(int level, int x, int y, int z, int channel) const;

    MaterialSample query(const Vec3& position) const;

    /// Query plus the sparse parameter rows: for every touched node the
    /// weight w such that d out[channel] / d param = w * sigma'(raw[channel]).
    struct QueryGrad {
        MaterialSample sample;
        std::array<double, kMaterialChannels> activation_slope;  // sigma'(raw_c)
        struct Tap {
            size_t node_base;  // parameter index of channel 0 at this node
            double weight;     // trilinear weight
        };
        std::vector<Tap> taps;  // <= 8 per level
        bool clamped = false;   // position was outside the bounds
    };
    QueryGrad query_with_gradient(const Vec3& position) const;

    /// Raw (pre-activation) channel sums at a position.
    std::array<double, kMaterialChannels> query_raw(const Vec3& position) const;

    /// Mean L1 change of the activated outputs under Gaussian position
    /// perturbations (sigma_perturb), over the given points.
    double smoothness_loss(const std::vector<Vec3>& points, double sigma_perturb, Rng& rng) const;

    /// Smoothness loss plus its gradient scaled by `weight` and accumulated
    /// into grad (size >= parameter_count). The same perturbations are
    /// replayed via the rng.
    double smoothness_loss_grad(const std::vector<Vec3>& points, double sigma_perturb, Rng& rng,
                                std::vector<double>& grad, double weight = 1.0) const;

    void save(const std::string& path) const;
    static MaterialField load(const std::string& path);

private:
    struct Level {
        int resolution = 0;
        size_t offset = 0;  // into parameters_, in nodes (x-fastest), 5 channels per node
    };
    Box3 bounds_;
    std::vector<Level> levels_;
    std::vector<double> parameters_;
};

}  // namespace geosplat
