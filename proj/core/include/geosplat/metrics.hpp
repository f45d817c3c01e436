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

#include <vector>

#include "geosplat/bvh.hpp"
#include "geosplat/camera.hpp"
#include "geosplat/gaussians.hpp"
#include "geosplat/image.hpp"

namespace geosplat {

/// 10 log10(1 / MSE) over [0,1]-clamped images; +inf when identical.
double psnr(const Image& pred, const Image& gt);

/// Mean local SSIM, 11x11 Gaussian window (sigma = 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1. Windows fully inside the image only.
double ssim(const Image& a, const Image& b);

/// SSIM plus d(mean SSIM)/d(a) as an image (same shape as a).
double ssim_with_gradient(const Image& a, const Image& b, Image& d_ssim_da);

/// Mean angular error in degrees between unit-normal maps over pixels where
/// mask > 0.5 and both normals are nonzero.
double normal_mae_degrees(const Image& pred_normals, const Image& gt_normals, const Image& mask);

/// Least-squares per-channel scale of pred onto gt over masked pixels
/// (the albedo-scaling evaluation protocol); returns the scaled copy.
Vec3 albedo_scale_factors(const Image& pred, const Image& gt, const Image& mask);
Image apply_channel_scale(const Image& img, const Vec3& scale);

/// Shape consistency between the splat render and the mesh ray cast:
/// per co-hit pixel, the camera ray is reflected about each normal (angular
/// error in degrees) and the depths are compared (L1, normalized by the mesh
/// bounding-box diagonal).
struct ShapeConsistency {
    double reflection_mae_deg = 0;
    double transfer_distance = 0;  // fraction of bbox diagonal
    double coverage = 0;           // co-hit fraction of splat-hit pixels
    bool valid = false;            // false when coverage < 1%
};
ShapeConsistency shape_consistency(const Bvh& bvh, const GaussianSet& gaussians,
                                   const std::vector<View>& views);

}  // namespace geosplat
