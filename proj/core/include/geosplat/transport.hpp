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
#include <optional>

#include "geosplat/bvh.hpp"
#include "geosplat/camera.hpp"
#include "geosplat/lighting.hpp"

namespace geosplat {

/// Binary mesh occlusion of direction wi seen from surface point x.
/// The ray starts biased along wi and along the surface normal to avoid
/// self-hits; range is (0, 4 * scene diagonal].
bool occlusion(const Bvh& bvh, const Vec3& x, const Vec3& wi, const Vec3& normal);

/// Self-intersection offsets (fractions of the scene bounding diagonal).
inline constexpr double kRayBias = 1e-4;
inline constexpr double kNormalBias = 1e-5;

struct TransportOptions {
    int samples = 64;             // total; split half cosine, half GGX
    bool occlusion_enabled = true;  // false forces O = 0 (ablation)
    uint64_t seed = 0;
};

/// One-sample-set Monte Carlo estimate of the outgoing radiance at a surface
/// point under the environment + occlusion-mixed indirect light. Half the
/// samples are cosine-distributed and estimate the diffuse lobe, half are
/// GGX-distributed and estimate the specular lobe (each branch averages
/// f_lobe * L_i * |n.wi| / pdf; below-horizon GGX directions contribute
/// zero, keeping both branch estimates unbiased). `diffuse_light` and
/// `specular_light` are the demodulated light values (BRDF color factors
/// divided out) used by the light regularizer.
struct RadianceEstimate {
    Vec3 color;          // diffuse + specular
    Vec3 diffuse;
    Vec3 specular;
    Vec3 diffuse_light;
    Vec3 specular_light;
};
RadianceEstimate estimate_radiance(const Vec3& x, const Vec3& n, const Vec3& wo,
                                   const MaterialSample& mat, const EnvironmentLight& env,
                                   const IndirectLight& indirect, const Bvh* bvh,
                                   const TransportOptions& opt, uint64_t stream);

/// Estimate plus derivatives for fitting. Sampling distributions come from
/// `sampling_mat` (detached); holding it fixed makes the estimate smooth in
/// the live material, so the derivatives below match finite differences of
/// this same function at a fixed stream.
struct RadianceEstimateGrad {
    RadianceEstimate value;
    Vec3 d_albedo;     // d color[c] / d albedo[c]
    Vec3 d_roughness;  // d color / d roughness
    Vec3 d_metalness;  // d color / d metalness
    Vec3 d_spec_light_d_rough;
    Vec3 d_diffuse_light_d_metal;

    // Sparse chain-rule taps into the lighting parameters. For a tap with
    // scalar weight w: d color[c]/d texel[c] = w * f_color[c],
    // d diffuse_light[c]/d texel[c] = w * f_diff_light, and
    // d specular_light[c]/d texel[c] = w * f_spec_nf (the latter two are
    // nonzero only for the matching branch's samples).
    struct EnvTap {
        int x, y;
        double w;
        Vec3 f_color;
        double f_diff_light;
        double f_spec_nf;
    };
    std::vector<EnvTap> env_taps;
    // SH taps additionally gate on the clamp mask per channel.
    struct ShTap {
        int index;
        double w;
        Vec3 clamp_mask;
        Vec3 f_color;
        double f_diff_light;
        double f_spec_nf;
    };
    std::vector<ShTap> sh_taps;
};
RadianceEstimateGrad estimate_radiance_grad(const Vec3& x, const Vec3& n, const Vec3& wo,
                                            const MaterialSample& mat,
                                            const MaterialSample& sampling_mat,
                                            const EnvironmentLight& env,
                                            const IndirectLight& indirect, const Bvh* bvh,
                                            const TransportOptions& opt, uint64_t stream);

/// Per-pixel closest-hit raycast of a view against the mesh.
struct RaycastResult {
    Image depth;     // H x W x 1; +inf where the ray misses
    Image normal;    // H x W x 3; (0,0,0) on miss (barycentric-interpolated)
    Image position;  // H x W x 3 hit points; 0 on miss
    Image hit_mask;  // H x W x 1 in {0,1}
};
RaycastResult raycast_view(const Bvh& bvh, const View& view);

}  // namespace geosplat
