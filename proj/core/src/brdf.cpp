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

#include "geosplat/brdf.hpp"

namespace geosplat {

namespace {
constexpr double kEps = 1e-7;

double pow5(double x) {
    double x2 = x * x;
    return x2 * x2 * x;
}
}  // namespace

double ggx_distribution(double n_dot_h, double alpha) {
    double a2 = alpha * alpha;
    double q = n_dot_h * n_dot_h * (a2 - 1.0) + 1.0;
    return a2 / std::max(kPi * q * q, kEps);
}

double smith_g1(double n_dot_w, double alpha) {
    double k = alpha / 2.0;
    return n_dot_w / std::max(n_dot_w * (1.0 - k) + k, kEps);
}

double smith_g(double n_dot_i, double n_dot_o, double alpha) {
    return smith_g1(n_dot_i, alpha) * smith_g1(n_dot_o, alpha);
}

Vec3 fresnel_schlick(const Vec3& f0, double cos_theta) {
    double w = pow5(1.0 - std::clamp(cos_theta, 0.0, 1.0));
    return f0 + (Vec3{1, 1, 1} - f0) * w;
}

BrdfTerms eval_brdf_terms(const MaterialSample& mat, const Vec3& n, const Vec3& wi,
                          const Vec3& wo) {
    BrdfTerms out{};
    double n_i = dot(n, wi), n_o = dot(n, wo);
    if (n_i <= 0 || n_o <= 0) return out;
    out.diffuse = mat.albedo * ((1.0 - mat.metalness) / kPi);

    Vec3 h = normalize(wi + wo);
    double n_h = std::clamp(dot(n, h), 0.0, 1.0);
    double h_o = std::clamp(dot(h, wo), 0.0, 1.0);
    double alpha = mat.roughness * mat.roughness;
    double d = ggx_distribution(n_h, alpha);
    double g = smith_g(n_i, n_o, alpha);
    double k = d * g / std::max(4.0 * n_i * n_o, kEps);
    out.specular = fresnel_schlick(mat.f0(), h_o) * k;
    out.specular_no_fresnel = k;
    return out;
}

Vec3 eval_brdf(const MaterialSample& mat, const Vec3& n, const Vec3& wi, const Vec3& wo) {
    BrdfTerms t = eval_brdf_terms(mat, n, wi, wo);
    return t.diffuse + t.specular;
}

BrdfGrad eval_brdf_grad(const MaterialSample& mat, const Vec3& n, const Vec3& wi, const Vec3& wo) {
    BrdfGrad out{};
    double n_i = dot(n, wi), n_o = dot(n, wo);
    if (n_i <= 0 || n_o <= 0) return out;

    Vec3 h = normalize(wi + wo);
    double n_h = std::clamp(dot(n, h), 0.0, 1.0);
    double h_o = std::clamp(dot(h, wo), 0.0, 1.0);
    double rho = mat.roughness, m = mat.metalness;
    double alpha = rho * rho;
    double a2 = alpha * alpha;

    double q = n_h * n_h * (a2 - 1.0) + 1.0;
    double denom_d = std::max(kPi * q * q, kEps);
    double d = a2 / denom_d;
    // d D / d alpha, valid where the pi*q^2 floor is inactive
    double dd_dalpha = 2.0 * alpha * (q - 2.0 * a2 * n_h * n_h) / std::max(kPi * q * q * q, kEps);

    double kk = alpha / 2.0;
    auto g1 = [&](double c) { return c / std::max(c * (1.0 - kk) + kk, kEps); };
    auto dg1_dalpha = [&](double c) {
        double den = std::max(c * (1.0 - kk) + kk, kEps);
        return -c * (1.0 - c) / (den * den) * 0.5;
    };
    double g1i = g1(n_i), g1o = g1(n_o);
    double g = g1i * g1o;
    double dg_dalpha = dg1_dalpha(n_i) * g1o + g1i * dg1_dalpha(n_o);

    double geo = std::max(4.0 * n_i * n_o, kEps);
    double kfac = d * g / geo;
    double dk_drho = (dd_dalpha * g + d * dg_dalpha) / geo * 2.0 * rho;

    double w5 = pow5(1.0 - h_o);
    Vec3 f0 = mat.f0();
    Vec3 fresnel = fresnel_schlick(f0, h_o);

    out.value.diffuse = mat.albedo * ((1.0 - m) / kPi);
    out.value.specular = fresnel * kfac;
    out.value.specular_no_fresnel = kfac;

    double df_df0 = 1.0 - w5;  // per channel
    for (int c = 0; c < 3; c++) {
        out.d_albedo[c] = (1.0 - m) / kPi + kfac * df_df0 * m;
        out.d_metalness[c] = -mat.albedo[c] / kPi + kfac * df_df0 * (mat.albedo[c] - 0.04);
        out.d_roughness[c] = fresnel[c] * dk_drho;
    }
    out.d_spec_nf_d_rough = dk_drho;
    return out;
}

bool sample_ggx(const MaterialSample& mat, const Vec3& n, const Vec3& wo, double u1, double u2,
                DirectionSample& out) {
    double alpha = std::max(mat.roughness * mat.roughness, 1e-8);
    double a2 = alpha * alpha;
    double cos2 = (1.0 - u1) / (1.0 + (a2 - 1.0) * u1);
    double cos_t = std::sqrt(std::max(cos2, 0.0));
    double sin_t = std::sqrt(std::max(1.0 - cos2, 0.0));
    double phi = 2.0 * kPi * u2;

    Vec3 t, b;
    orthonormal_basis(n, t, b);
    Vec3 h = t * (sin_t * std::cos(phi)) + b * (sin_t * std::sin(phi)) + n * cos_t;

    Vec3 wi = reflect(wo, h);
    if (dot(n, wi) <= 0) return false;
    double h_o = dot(h, wo);
    if (h_o <= 0) return false;
    out.direction = wi;
    out.pdf = ggx_distribution(cos_t, alpha) * cos_t / std::max(4.0 * h_o, kEps);
    return out.pdf > 0;
}

DirectionSample sample_cosine(const Vec3& n, double u1, double u2) {
    double cos_t = std::sqrt(std::max(1.0 - u1, 0.0));
    double sin_t = std::sqrt(std::max(u1, 0.0));
    double phi = 2.0 * kPi * u2;
    Vec3 t, b;
    orthonormal_basis(n, t, b);
    DirectionSample s;
    s.direction = t * (sin_t * std::cos(phi)) + b * (sin_t * std::sin(phi)) + n * cos_t;
    s.pdf = std::max(cos_t, 0.0) / kPi;
    return s;
}

double ggx_pdf(const MaterialSample& mat, const Vec3& n, const Vec3& wo, const Vec3& wi) {
    if (dot(n, wi) <= 0 || dot(n, wo) <= 0) return 0;
    Vec3 h = normalize(wi + wo);
    double n_h = std::clamp(dot(n, h), 0.0, 1.0);
    double h_o = std::clamp(dot(h, wo), 0.0, 1.0);
    double alpha = std::max(mat.roughness * mat.roughness, 1e-8);
    return ggx_distribution(n_h, alpha) * n_h / std::max(4.0 * h_o, kEps);
}

}  // namespace geosplat
