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

#include "geosplat/config.hpp"

#include <stdexcept>

namespace geosplat {

ShadingMode shading_mode_from_string(const std::string& s) {
    if (s == "forward") return ShadingMode::forward;
    if (s == "deferred") return ShadingMode::deferred;
    throw std::invalid_argument("unknown shading mode: " + s);
}

LightingMode lighting_mode_from_string(const std::string& s) {
    if (s == "split_sum" || s == "splitsum") return LightingMode::split_sum;
    if (s == "monte_carlo" || s == "mc") return LightingMode::monte_carlo;
    throw std::invalid_argument("unknown lighting mode: " + s);
}

std::string to_string(ShadingMode m) { return m == ShadingMode::forward ? "forward" : "deferred"; }
std::string to_string(LightingMode m) {
    return m == LightingMode::split_sum ? "split_sum" : "monte_carlo";
}

void RunConfig::validate() const {
    if (samples_per_pixel < 1 || mc_samples < 1 || mc_samples_fit < 1 || mc_samples_final < 1)
        throw std::invalid_argument("config: sample counts must be >= 1");
    if (iterations < 0) throw std::invalid_argument("config: iterations must be >= 0");
    if (weights.ssim < 0 || weights.mask < 0 || weights.sdf < 0 || weights.smooth < 0 ||
        weights.light < 0)
        throw std::invalid_argument("config: loss weights must be >= 0");
    if (sh_degree < 0 || sh_degree > 2)
        throw std::invalid_argument("config: sh_degree must be 0, 1 or 2");
    if (!(warmup_fraction >= 0 && warmup_fraction <= 1))
        throw std::invalid_argument("config: warmup_fraction must be in [0,1]");
    adapter.validate();
}

nlohmann::json RunConfig::to_json() const {
    return {
        {"samples_per_pixel", samples_per_pixel},
        {"mc_samples", mc_samples},
        {"adapter",
         {{"u", adapter.u},
          {"v", adapter.v},
          {"alpha_inner", adapter.alpha_inner},
          {"alpha_outer", adapter.alpha_outer},
          {"beta_inner", adapter.beta_inner},
          {"beta_outer", adapter.beta_outer},
          {"delta", adapter.delta},
          {"vertex_k", adapter.vertex_k}}},
        {"loss_weights",
         {{"ssim", weights.ssim},
          {"mask", weights.mask},
          {"sdf", weights.sdf},
          {"sdf_end", weights.sdf_end},
          {"smooth", weights.smooth},
          {"light", weights.light}}},
        {"sh_degree", sh_degree},
        {"rng_seed", rng_seed},
        {"shading_mode", to_string(shading_mode)},
        {"lighting_mode", to_string(lighting_mode)},
        {"iterations", iterations},
        {"warmup_fraction", warmup_fraction},
        {"lr_material", lr_material},
        {"lr_lighting", lr_lighting},
        {"adam_beta1", adam_beta1},
        {"adam_beta2", adam_beta2},
        {"mc_samples_fit", mc_samples_fit},
        {"mc_samples_final", mc_samples_final},
        {"optimize_environment", optimize_environment},
        {"optimize_indirect", optimize_indirect},
        {"occlusion_enabled", occlusion_enabled},
        {"env_fit_height", env_fit_height},
        {"smoothness_sigma", smoothness_sigma},
        {"smoothness_points", smoothness_points},
    };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.samples_per_pixel = j.value("samples_per_pixel", c.samples_per_pixel);
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    if (j.contains("adapter")) {
        const auto& a = j.at("adapter");
        c.adapter.u = a.value("u", c.adapter.u);
        c.adapter.v = a.value("v", c.adapter.v);
        c.adapter.alpha_inner = a.value("alpha_inner", c.adapter.alpha_inner);
        c.adapter.alpha_outer = a.value("alpha_outer", c.adapter.alpha_outer);
        c.adapter.beta_inner = a.value("beta_inner", c.adapter.beta_inner);
        c.adapter.beta_outer = a.value("beta_outer", c.adapter.beta_outer);
        c.adapter.delta = a.value("delta", c.adapter.delta);
        c.adapter.vertex_k = a.value("vertex_k", c.adapter.vertex_k);
    }
    if (j.contains("loss_weights")) {
        const auto& w = j.at("loss_weights");
        c.weights.ssim = w.value("ssim", c.weights.ssim);
        c.weights.mask = w.value("mask", c.weights.mask);
        c.weights.sdf = w.value("sdf", c.weights.sdf);
        c.weights.sdf_end = w.value("sdf_end", c.weights.sdf_end);
        c.weights.smooth = w.value("smooth", c.weights.smooth);
        c.weights.light = w.value("light", c.weights.light);
    }
    c.sh_degree = j.value("sh_degree", c.sh_degree);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    if (j.contains("shading_mode")) c.shading_mode = shading_mode_from_string(j.at("shading_mode"));
    if (j.contains("lighting_mode"))
        c.lighting_mode = lighting_mode_from_string(j.at("lighting_mode"));
    c.iterations = j.value("iterations", c.iterations);
    c.warmup_fraction = j.value("warmup_fraction", c.warmup_fraction);
    c.lr_material = j.value("lr_material", c.lr_material);
    c.lr_lighting = j.value("lr_lighting", c.lr_lighting);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.mc_samples_fit = j.value("mc_samples_fit", c.mc_samples_fit);
    c.mc_samples_final = j.value("mc_samples_final", c.mc_samples_final);
    c.optimize_environment = j.value("optimize_environment", c.optimize_environment);
    c.optimize_indirect = j.value("optimize_indirect", c.optimize_indirect);
    c.occlusion_enabled = j.value("occlusion_enabled", c.occlusion_enabled);
    c.env_fit_height = j.value("env_fit_height", c.env_fit_height);
    c.smoothness_sigma = j.value("smoothness_sigma", c.smoothness_sigma);
    c.smoothness_points = j.value("smoothness_points", c.smoothness_points);
    c.validate();
    return c;
}

}  // namespace geosplat
