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
#include <string>

#include <json.hpp>

#include "geosplat/adapter.hpp"

namespace geosplat {

enum class ShadingMode { forward, deferred };
enum class LightingMode { split_sum, monte_carlo };

ShadingMode shading_mode_from_string(const std::string& s);
LightingMode lighting_mode_from_string(const std::string& s);
std::string to_string(ShadingMode m);
std::string to_string(LightingMode m);

struct LossWeights {
    double ssim = 0.2;
    double mask = 5.0;
    double sdf = 0.2;     // schedule start; decays linearly to sdf_end mid-run
    double sdf_end = 0.01;
    double smooth = 0.03;
    double light = 0.15;
};

struct RunConfig {
    int samples_per_pixel = 1;
    int mc_samples = 64;
    AdapterConstants adapter;
    LossWeights weights;
    int sh_degree = 2;
    uint64_t rng_seed = 0;
    ShadingMode shading_mode = ShadingMode::forward;
    LightingMode lighting_mode = LightingMode::split_sum;

    // fitting stage
    int iterations = 600;
    double warmup_fraction = 0.5;  // split-sum stage length
    double lr_material = 5e-3;
    double lr_lighting = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    int mc_samples_fit = 32;       // per Gaussian during the MC stage
    int mc_samples_final = 256;    // final renders
    bool optimize_environment = false;
    bool optimize_indirect = false;
    bool occlusion_enabled = true;
    int env_fit_height = 16;       // learnable env texel grid is 2h x h
    double smoothness_sigma = 0.01;
    int smoothness_points = 256;   // Gaussian centers drawn per iteration

    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace geosplat
