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

#include "geosplat/splat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "geosplat/parallel.hpp"

namespace geosplat {

ProjectedGaussian project_gaussian(const GaussianPoint& g, const View& view,
                                   const SplatOptions& opts) {
    ProjectedGaussian out;
    const Mat3 w = view.world_to_camera.rotation();
    const Vec3 cam = view.world_to_camera.transform_point(g.position);
    const double z = cam.z;
    out.depth = -z;
    if (out.depth <= 1e-9) return out;  // behind the camera

    out.center = {view.principal_x + view.focal_x * cam.x / out.depth,
                  view.principal_y - view.focal_y * cam.y / out.depth};

    // perspective Jacobian of (u, v) at the center (camera z is negative)
    const double j00 = view.focal_x / (-z);
    const double j02 = view.focal_x * cam.x / (z * z);
    const double j11 = view.focal_y / z;
    const double j12 = -view.focal_y * cam.y / (z * z);

    const Mat3 sigma_cam = w * g.covariance() * transpose(w);
    // Sigma2D = J Sigma_cam J^T with J = [[j00, 0, j02], [0, j11, j12]]
    auto s = sigma_cam.m;
    const double a = j00 * (j00 * s[0][0] + j02 * s[2][0]) + j02 * (j00 * s[0][2] + j02 * s[2][2]);
    const double b = j00 * (j11 * s[0][1] + j12 * s[0][2]) + j02 * (j11 * s[2][1] + j12 * s[2][2]);
    const double c = j11 * (j11 * s[1][1] + j12 * s[1][2]) + j12 * (j11 * s[2][1] + j12 * s[2][2]);

    const double det = a * c - b * b;
    if (!(det > 1e-24) || !std::isfinite(det)) return out;  // degenerate footprint
    out.inv_a = c / det;
    out.inv_b = -b / det;
    out.inv_c = a / det;
    const double mid = 0.5 * (a + c);
    const double eig = mid + std::sqrt(std::max(mid * mid - det, 0.0));
    out.radius = opts.sigma_cutoff * std::sqrt(std::max(eig, 0.0));
    out.valid = out.radius > 0;
    return out;
}

SplatCache build_splat_cache(const GaussianSet& set, const View& view, const SplatOptions& opts) {
    view.validate();
    SplatCache cache;
    cache.width = view.width;
    cache.height = view.height;
    cache.pixel_weights.assign(size_t(view.width) * view.height, {});
    cache.alpha = Image(view.width, view.height, 1, 0.0);
    cache.depth = Image(view.width, view.height, 1, kInf);
    if (set.empty()) return cache;

    const size_t n = set.size();
    std::vector<ProjectedGaussian> proj(n);
    std::atomic<size_t> degenerate{0};
    parallel_for(n, [&](size_t i) {
        proj[i] = project_gaussian(set.points[i], view, opts);
        if (!proj[i].valid && view.world_to_camera.transform_point(set.points[i].position).z < 0)
            degenerate.fetch_add(1);
    });
    cache.degenerate_skipped = degenerate.load();

    // front-to-back order; ties broken on index so the sort is total
    std::vector<uint32_t> order;
    order.reserve(n);
    for (uint32_t i = 0; i < n; i++)
        if (proj[i].valid) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](uint32_t lhs, uint32_t rhs) {
        return proj[lhs].depth < proj[rhs].depth || (proj[lhs].depth == proj[rhs].depth && lhs < rhs);
    });

    // bucket by covered row (depth order preserved within each row)
    std::vector<std::vector<uint32_t>> rows(size_t(view.height));
    for (uint32_t idx : order) {
        const ProjectedGaussian& p = proj[idx];
        int y0 = std::max(0, int(std::floor(p.center.y - p.radius)));
        int y1 = std::min(view.height - 1, int(std::ceil(p.center.y + p.radius)));
        for (int y = y0; y <= y1; y++) rows[size_t(y)].push_back(idx);
    }

    const double cutoff2 = opts.sigma_cutoff * opts.sigma_cutoff;
    parallel_for(size_t(view.height), [&](size_t row) {
        const int y = int(row);
        std::vector<double> transmittance(size_t(view.width), 1.0);
        std::vector<double> depth_sum(size_t(view.width), 0.0);
        for (uint32_t idx : rows[row]) {
            const ProjectedGaussian& p = proj[idx];
            int x0 = std::max(0, int(std::floor(p.center.x - p.radius)));
            int x1 = std::min(view.width - 1, int(std::ceil(p.center.x + p.radius)));
            const double dy = (y + 0.5) - p.center.y;
            for (int x = x0; x <= x1; x++) {
                const double dx = (x + 0.5) - p.center.x;
                const double maha = p.inv_a * dx * dx + 2.0 * p.inv_b * dx * dy + p.inv_c * dy * dy;
                if (maha > cutoff2) continue;
                double alpha = set.points[idx].opacity * std::exp(-0.5 * maha);
                alpha = std::min(alpha, opts.alpha_clamp);
                if (alpha <= 0) continue;
                const double w = alpha * transmittance[size_t(x)];
                cache.pixel_weights[size_t(y) * view.width + x].emplace_back(idx, w);
                depth_sum[size_t(x)] += w * p.depth;
                transmittance[size_t(x)] *= 1.0 - alpha;
            }
        }
        for (int x = 0; x < view.width; x++) {
            const double a = 1.0 - transmittance[size_t(x)];
            cache.alpha.at(y, x) = a;
            cache.depth.at(y, x) = a > 0 ? depth_sum[size_t(x)] / a : kInf;
        }
    });
    return cache;
}

Image composite(const SplatCache& cache, std::span<const Vec3> payload) {
    Image out(cache.width, cache.height, 3, 0.0);
    parallel_for(size_t(cache.height), [&](size_t row) {
        const int y = int(row);
        for (int x = 0; x < cache.width; x++) {
            Vec3 sum{0, 0, 0};
            for (const auto& [idx, w] : cache.at(y, x)) sum += payload[idx] * w;
            out.set_pixel3(y, x, sum);
        }
    });
    return out;
}

Image composite_scalar(const SplatCache& cache, std::span<const double> payload) {
    Image out(cache.width, cache.height, 1, 0.0);
    parallel_for(size_t(cache.height), [&](size_t row) {
        const int y = int(row);
        for (int x = 0; x < cache.width; x++) {
            double sum = 0;
            for (const auto& [idx, w] : cache.at(y, x)) sum += payload[idx] * w;
            out.at(y, x) = sum;
        }
    });
    return out;
}

void composite_backprop(const SplatCache& cache, const Image& d_pixels,
                        std::span<Vec3> grad_payload) {
    for (int y = 0; y < cache.height; y++) {
        for (int x = 0; x < cache.width; x++) {
            const Vec3 g = d_pixels.pixel3(y, x);
            if (g.x == 0 && g.y == 0 && g.z == 0) continue;
            for (const auto& [idx, w] : cache.at(y, x)) grad_payload[idx] += g * w;
        }
    }
}

RasterizeResult rasterize(const GaussianSet& set, const View& view, const SplatOptions& opts) {
    if (set.payload != PayloadKind::color && !set.points.empty())
        throw std::invalid_argument("rasterize: set has no color payload");
    SplatCache cache = build_splat_cache(set, view, opts);
    RasterizeResult result;
    result.color = set.empty() ? Image(view.width, view.height, 3, 0.0)
                               : composite(cache, std::span<const Vec3>(set.colors));
    result.alpha = cache.alpha;
    result.degenerate_skipped = cache.degenerate_skipped;
    return result;
}

GBuffer rasterize_gbuffer(const GaussianSet& set, const SplatCache& cache) {
    const size_t n = set.size();
    std::vector<Vec3> mu(n), nrm(n), alb(n);
    std::vector<double> rough(n), metal(n);
    for (size_t i = 0; i < n; i++) {
        mu[i] = set.points[i].position;
        nrm[i] = set.points[i].normal;
        const MaterialSample& m =
            set.payload == PayloadKind::attributes ? set.materials[i] : MaterialSample{};
        alb[i] = m.albedo;
        rough[i] = m.roughness;
        metal[i] = m.metalness;
    }
    GBuffer gb;
    gb.position = composite(cache, mu);
    gb.normal = composite(cache, nrm);
    gb.albedo = composite(cache, alb);
    gb.roughness = composite_scalar(cache, rough);
    gb.metalness = composite_scalar(cache, metal);
    gb.alpha = cache.alpha;
    gb.depth = cache.depth;

    // attribute estimates are alpha-normalized; normals renormalized where
    // coverage is solid
    for (int y = 0; y < cache.height; y++) {
        for (int x = 0; x < cache.width; x++) {
            const double a = gb.alpha.at(y, x);
            if (a <= 1e-12) continue;
            gb.position.set_pixel3(y, x, gb.position.pixel3(y, x) / a);
            gb.albedo.set_pixel3(y, x, gb.albedo.pixel3(y, x) / a);
            gb.roughness.at(y, x) /= a;
            gb.metalness.at(y, x) /= a;
            Vec3 nn = gb.normal.pixel3(y, x) / a;
            if (a > 0.5) {
                const double l = length(nn);
                if (l > 0) nn /= l;
            }
            gb.normal.set_pixel3(y, x, nn);
        }
    }
    return gb;
}

GBuffer rasterize_gbuffer(const GaussianSet& set, const View& view, const SplatOptions& opts) {
    SplatCache cache = build_splat_cache(set, view, opts);
    return rasterize_gbuffer(set, cache);
}

DepthNormalMaps render_depth_normal(const GaussianSet& set, const View& view,
                                    const SplatOptions& opts) {
    SplatCache cache = build_splat_cache(set, view, opts);
    std::vector<Vec3> normals(set.size());
    for (size_t i = 0; i < set.size(); i++) normals[i] = set.points[i].normal;
    DepthNormalMaps maps;
    maps.depth = cache.depth;
    maps.normal = composite(cache, normals);
    for (int y = 0; y < cache.height; y++) {
        for (int x = 0; x < cache.width; x++) {
            const double a = cache.alpha.at(y, x);
            if (a <= 1e-12) {
                maps.normal.set_pixel3(y, x, {0, 0, 0});
                continue;
            }
            maps.normal.set_pixel3(y, x, normalize(maps.normal.pixel3(y, x)));
        }
    }
    return maps;
}

}  // namespace geosplat
