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

#include <functional>
#include <string>
#include <vector>

#include "geosplat/brdf.hpp"
#include "geosplat/lighting.hpp"
#include "geosplat/scene_io.hpp"

namespace geosplat::selftest {

/// One end-to-end check with its pinned tolerance.
struct Criterion {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;   // measured value vs threshold
    double seconds = 0;
};

Criterion adapter_exactness();       // 1: closed forms to 1e-9
Criterion shape_consistency_check(); // 2: icosphere reflection MAE / transfer distance
Criterion bvh_oracle();              // 3: BVH vs brute force, 0 mismatches
Criterion furnace();                 // 4: diffuse furnace a*c (1% / 2% / exact 0)
Criterion splitsum_vs_mc();          // 5: per-pixel RMSE < 5%
Criterion lut_oracle();              // 6: 16 texels vs hemisphere integration
Criterion gradient_contract();       // 7: field FD 1e-6; end-to-end probes
Criterion material_recovery();       // 8: albedo PSNR >= 28 dB, roughness MSE <= 0.01
Criterion occlusion_ablation();      // 9: shadowed-region albedo error improvement >= 20%
Criterion loss_identities();         // 10: unit identities

/// Runs all ten in order; `on_done` fires after each one.
std::vector<Criterion> run_all(const std::function<void(const Criterion&)>& on_done = {});

// Synthetic fixtures shared with the test suites -----------------------------

/// Smooth low-frequency positive environment (analytic; W = 2 * height).
EnvironmentLight smooth_environment(int height = 32);
/// Bright overhead patch plus dim ambient (casts a crisp downward shadow).
EnvironmentLight overhead_environment(int height = 32);

/// Synthetic scene rendered by this pipeline (targets and masks attached).
struct SyntheticScene {
    Scene scene;
    std::function<MaterialSample(const Vec3&)> gt_material;
    IndirectLight gt_indirect;
};
/// Two-material sphere (albedo/roughness split across the x = 0 plane).
SyntheticScene two_material_sphere(int views, int resolution, int subdivisions,
                                   int gt_samples = 256);
/// Ground plane plus a floating blocker under the overhead light.
SyntheticScene plane_with_blocker(int views, int resolution, int gt_samples = 256);

}  // namespace geosplat::selftest
