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
#include "geosplat/image.hpp"
#include "geosplat/math.hpp"

namespace geosplat {

// Lat-long (equirectangular) parameterization, y up:
//   u in [0,1) wraps in longitude, v in [0,1] runs from +y (top) to -y.
Vec2 direction_to_latlong(const Vec3& d);
Vec3 latlong_to_direction(double u, double v);

/// Bilinear texel footprint of a lat-long lookup: wrap in u, clamp in v.
struct BilinearTaps {
    std::array<int, 4> x, y;
    std::array<double, 4> w;
};
BilinearTaps latlong_taps(int width, int height, double u, double v);
Vec3 sample_latlong(const Image& img, const Vec3& dir);

/// Bilinear upsampling of a lat-long map (wrap in longitude); used to drive a
/// full-resolution light from a coarse learnable texel grid.
Image upsample_latlong(const Image& coarse, int width, int height);
/// Adjoint of upsample_latlong: scatters output-space gradients back to the
/// coarse grid.
void upsample_latlong_adjoint(const Image& grad_out, Image& grad_coarse);

/// Environment light: raw lat-long radiance plus the split-sum tables
/// (prefiltered roughness pyramid, cosine-convolved irradiance, scale/bias
/// BRDF lookup table). Tables are filled by precompute_splitsum.
struct EnvironmentLight {
    Image radiance;                 // H x W x 3, W == 2H, linear
    std::vector<Image> prefiltered; // mip pyramid; level l filtered at rho_l = l/(mips-1)
    Image irradiance;               // cosine-convolved lat-long map
    int lut_size = 0;
    std::vector<double> lut;        // lut_size^2 x 2 (scale, bias)

    bool tables_ready() const { return !prefiltered.empty() && lut_size > 0; }

    Vec3 sample_radiance(const Vec3& dir) const { return sample_latlong(radiance, dir); }
    Vec3 sample_irradiance(const Vec3& n) const { return sample_latlong(irradiance, n); }
    /// Trilinear lookup in the roughness pyramid.
    Vec3 sample_prefiltered(const Vec3& dir, double roughness) const;
    /// (scale, bias) for Schlick F0 at (n.v, roughness).
    Vec2 sample_lut(double n_dot_v, double roughness) const;

    void validate_radiance() const;  // W == 2H, finite, >= 0
};

struct SplitSumParams {
    int mips = 6;
    int lut_size = 64;
    int lut_samples = 1024;        // >= 1024 per texel
    int prefilter_samples = 128;   // GGX samples per prefiltered texel
    int irradiance_width = 32;     // irradiance map resolution (height = w/2)
};

/// Fills the split-sum tables from the raw radiance map. Deterministic
/// (low-discrepancy sample sets, no RNG).
void precompute_splitsum(EnvironmentLight& env, const SplitSumParams& params = {});
/// The two halves: the prefiltered/irradiance tables depend on the radiance
/// map, the BRDF lookup table does not (it can be computed once and copied
/// when the radiance is being optimized).
void precompute_radiance_tables(EnvironmentLight& env, const SplitSumParams& params = {});
void precompute_brdf_lut(EnvironmentLight& env, const SplitSumParams& params = {});

/// Disk cache of the precomputed tables next to the source map, keyed by a
/// content hash of the radiance and parameters. Returns false on miss.
uint64_t splitsum_cache_key(const EnvironmentLight& env, const SplitSumParams& params);
void save_splitsum_cache(const EnvironmentLight& env, const SplitSumParams& params,
                         const std::string& path);
bool load_splitsum_cache(EnvironmentLight& env, const SplitSumParams& params,
                         const std::string& path);

// Split-sum shading --------------------------------------------------------

struct SplitSumShade {
    Vec3 color;            // diffuse + specular outgoing radiance
    Vec3 diffuse_light;    // demodulated diffuse incident term (irradiance)
    Vec3 specular_light;   // demodulated specular term (prefiltered * (A+B))
};
SplitSumShade shade_splitsum(const MaterialSample& mat, const Vec3& n, const Vec3& wo,
                             const EnvironmentLight& env);

/// Shading value plus derivatives w.r.t. the material sample and sparse
/// derivatives w.r.t. the light tables (for the fitting loop).
struct SplitSumShadeGrad {
    SplitSumShade value;
    Vec3 d_albedo;      // d color[c] / d albedo[c]
    Vec3 d_roughness;   // d color / d roughness
    Vec3 d_metalness;   // d color / d metalness
    Vec3 d_spec_light_d_rough;  // d specular_light / d roughness

    // table taps: d color[c] / d table_texel[c] = factor[c] * weight
    BilinearTaps irradiance_taps;
    Vec3 irradiance_factor;                       // (1-m) * albedo
    std::array<int, 2> prefiltered_level{0, 0};
    std::array<double, 2> prefiltered_level_w{1, 0};
    std::array<BilinearTaps, 2> prefiltered_taps;
    Vec3 prefiltered_factor;                      // F0 * A + B
    Vec3 spec_light_prefilter_factor;             // (A + B) per channel (scalar replicated)
};
SplitSumShadeGrad shade_splitsum_grad(const MaterialSample& mat, const Vec3& n, const Vec3& wo,
                                      const EnvironmentLight& env);

/// Gradient images for the split-sum tables, plus the adjoint pass that maps
/// them back to the raw radiance texels by re-walking the precompute.
struct EnvTableGrad {
    Image d_irradiance;                  // same shape as env.irradiance
    std::vector<Image> d_prefiltered;    // same shapes as env.prefiltered

    void init(const EnvironmentLight& env);
    /// Accumulates table gradients of one shade into the images.
    void accumulate(const SplitSumShadeGrad& g, const Vec3& d_loss_d_color,
                    const Vec3& d_loss_d_diffuse_light, const Vec3& d_loss_d_spec_light);
    bool empty() const { return d_irradiance.empty(); }
};
/// d loss / d radiance texel, by transposing the (linear) precompute.
Image backprop_tables_to_radiance(const EnvironmentLight& env, const SplitSumParams& params,
                                  const EnvTableGrad& grad);

// Indirect light -----------------------------------------------------------

/// Low-order spherical-harmonic radiance used for occluded directions.
struct IndirectLight {
    int degree = 2;                 // 0, 1 or 2
    std::vector<Vec3> coefficients; // (degree+1)^2 RGB triples

    IndirectLight() : coefficients(9, Vec3{0, 0, 0}) {}
    explicit IndirectLight(int deg)
        : degree(deg), coefficients(size_t(deg + 1) * (deg + 1), Vec3{0, 0, 0}) {}

    /// Radiance clamped to >= 0.
    Vec3 eval(const Vec3& dir) const;
    /// Basis values at dir (for gradients); size (degree+1)^2.
    void basis(const Vec3& dir, double* out) const;
    void validate() const;
};

/// Real SH basis value Y_lm packed as [00, 1-1, 10, 11, 2-2, 2-1, 20, 21, 22].
double sh_basis(int index, const Vec3& dir);

/// Incident radiance of the light decomposition:
///   L_i = (1 - O) * L_dir(w_i) + O * L_ind(w_i)
/// with O in [0,1] (binary for mesh occlusion).
Vec3 compose_incident(const EnvironmentLight& env, const IndirectLight& indirect, double occlusion,
                      const Vec3& wi);

}  // namespace geosplat
