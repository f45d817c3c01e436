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

#include "geosplat/math.hpp"
#include "geosplat/rng.hpp"

namespace geosplat {

/// PBR material: albedo in [0,1]^3, roughness and metalness in [0,1].
/// Construction clamps into range.
struct MaterialSample {
    Vec3 albedo{0.5, 0.5, 0.5};
    double roughness = 0.5;
    double metalness = 0.0;

    MaterialSample() = default;
    MaterialSample(const Vec3& a, double rho, double m)
        : albedo(clamp(a, 0.0, 1.0)),
          roughness(std::clamp(rho, 0.0, 1.0)),
          metalness(std::clamp(m, 0.0, 1.0)) {}

    /// Schlick base reflectance: 0.04 dielectric, albedo-tinted metal.
    Vec3 f0() const { return Vec3{0.04, 0.04, 0.04} * (1.0 - metalness) + albedo * metalness; }
};

// Microfacet terms. alpha is the squared perceptual roughness (alpha = rho^2).
double ggx_distribution(double n_dot_h, double alpha);
double smith_g1(double n_dot_w, double alpha);          // Schlick-GGX, k = alpha/2
double smith_g(double n_dot_i, double n_dot_o, double alpha);
Vec3 fresnel_schlick(const Vec3& f0, double cos_theta);

/// Cook-Torrance GGX BRDF of the shading model:
///   f = (1 - m) * a / pi + D * F * G / (4 |n.wi| |n.wo|)
/// Returns zero when either direction is below the horizon. All input
/// vectors must be unit length.
Vec3 eval_brdf(const MaterialSample& mat, const Vec3& n, const Vec3& wi, const Vec3& wo);

/// Split evaluation used by the estimator and the demodulated-light images:
/// diffuse = (1-m) a / pi, specular = D F G / (4 ..), and the same specular
/// weight with F forced to 1 (for albedo/Fresnel-free light images).
struct BrdfTerms {
    Vec3 diffuse;
    Vec3 specular;
    double specular_no_fresnel = 0;
};
BrdfTerms eval_brdf_terms(const MaterialSample& mat, const Vec3& n, const Vec3& wi, const Vec3& wo);

/// Derivatives of both BRDF terms with respect to (albedo, roughness,
/// metalness). Albedo channels do not cross-couple, so d_albedo[c] is
/// d f[c] / d a[c].
struct BrdfGrad {
    BrdfTerms value;
    Vec3 d_albedo;            // d f[c] / d a[c]
    Vec3 d_roughness;         // d f / d rho
    Vec3 d_metalness;         // d f / d m
    double d_spec_nf_d_rough = 0;  // d specular_no_fresnel / d rho
};
BrdfGrad eval_brdf_grad(const MaterialSample& mat, const Vec3& n, const Vec3& wi, const Vec3& wo);

/// GGX importance sample: draws a half vector from D(h) |n.h| and reflects.
/// Returns false when the reflected direction falls below the horizon.
struct DirectionSample {
    Vec3 direction;
    double pdf = 0;
};
bool sample_ggx(const MaterialSample& mat, const Vec3& n, const Vec3& wo, double u1, double u2,
                DirectionSample& out);

/// Cosine-weighted hemisphere sample about n; pdf = |n.wi| / pi.
DirectionSample sample_cosine(const Vec3& n, double u1, double u2);

/// pdf of sample_ggx for a given incident direction (useful for checks).
double ggx_pdf(const MaterialSample& mat, const Vec3& n, const Vec3& wo, const Vec3& wi);

}  // namespace geosplat
