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

#include <span>
#include <utility>
#include <vector>

#include "geosplat/camera.hpp"
#include "geosplat/gaussians.hpp"
#include "geosplat/image.hpp"

namespace geosplat {

struct SplatOptions {
    double alpha_clamp = 0.99;   // per-splat opacity ceiling
    double sigma_cutoff = 3.0;   // footprint truncation in standard deviations
};

/// EWA projection of one Gaussian into a view: screen-space center, inverse
/// 2D covariance (from J W Sigma W^T J^T) and a conservative pixel radius.
struct ProjectedGaussian {
    bool valid = false;
    double depth = 0;          // -z in camera space
    Vec2 center;               // image coordinates
    double inv_a = 0, inv_b = 0, inv_c = 0;  // inverse of [[a,b],[b,c]]
    double radius = 0;         // cutoff radius in pixels
};
ProjectedGaussian project_gaussian(const GaussianPoint& g, const View& view,
                                   const SplatOptions& opts = {});

/// Depth-sorted per-pixel compositing weights. Splat footprints depend only
/// on geometry, so a cache built once can composite any payload (and push
/// pixel gradients back to per-point payload gradients) while materials
/// change.
struct SplatCache {
    int width = 0, height = 0;
    // per pixel, front-to-back (index into the point list, alpha * transmittance)
    std::vector<std::vector<std::pair<uint32_t, double>>> pixel_weights;
    Image alpha;  // 1 - prod(1 - alpha_i)
    Image depth;  // alpha-weighted expected depth; +inf where alpha == 0
    size_t degenerate_skipped = 0;

    const std::vector<std::pair<uint32_t, double>>& at(int y, int x) const {
        return pixel_weights[size_t(y) * width + x];
    }
};
SplatCache build_splat_cache(const GaussianSet& set, const View& view,
                             const SplatOptions& opts = {});

/// C = sum_i w_i * payload_i per pixel (premultiplied; transparent black
/// background). payload size must match the point count.
Image composite(const SplatCache& cache, std::span<const Vec3> payload);
Image composite_scalar(const SplatCache& cache, std::span<const double> payload);

/// Transpose of composite: d loss / d payload_i = sum_pixels w_i * d loss / d C.
/// Accumulates into grad (pre-sized to the point count); deterministic
/// (serial scatter in pixel order).
void composite_backprop(const SplatCache& cache, const Image& d_pixels,
                        std::span<Vec3> grad_payload);

struct RasterizeResult {
    Image color;  // H x W x 3
    Image alpha;  // H x W x 1
    size_t degenerate_skipped = 0;
};
/// Forward-shading path: composites the set's color payload.
RasterizeResult rasterize(const GaussianSet& set, const View& view, const SplatOptions& opts = {});

/// Screen-space attribute maps for deferred shading.
struct GBuffer {
    Image position;   // H x W x 3, alpha-normalized blend of mu
    Image normal;     // H x W x 3, renormalized where alpha > 0.5
    Image albedo;     // H x W x 3
    Image roughness;  // H x W x 1
    Image metalness;  // H x W x 1
    Image alpha;      // H x W x 1
    Image depth;      // H x W x 1, +inf sentinel where empty
};
GBuffer rasterize_gbuffer(const GaussianSet& set, const View& view, const SplatOptions& opts = {});
GBuffer rasterize_gbuffer(const GaussianSet& set, const SplatCache& cache);

struct DepthNormalMaps {
    Image depth;   // +inf where no splat coverage
    Image normal;  // (0,0,0) where empty; renormalized elsewhere
};
DepthNormalMaps render_depth_normal(const GaussianSet& set, const View& view,
                                    const SplatOptions& opts = {});

}  // namespace geosplat
