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

#include "geosplat/lighting.hpp"

#include <cstring>
#include <stdexcept>

#include "geosplat/blob_io.hpp"
#include "geosplat/parallel.hpp"

namespace geosplat {

Vec2 direction_to_latlong(const Vec3& d) {
    double u = 0.5 + std::atan2(d.x, -d.z) / (2.0 * kPi);
    if (u >= 1.0) u -= 1.0;
    if (u < 0.0) u += 1.0;
    double v = std::acos(std::clamp(d.y, -1.0, 1.0)) / kPi;
    return {u, v};
}

Vec3 latlong_to_direction(double u, double v) {
    double theta = v * kPi;
    double phi = (u - 0.5) * 2.0 * kPi;
    double st = std::sin(theta);
    return {st * std::sin(phi), std::cos(theta), -st * std::cos(phi)};
}

BilinearTaps latlong_taps(int width, int height, double u, double v) {
    double fx = u * width - 0.5;
    double fy = v * height - 0.5;
    int x0 = int(std::floor(fx));
    int y0 = int(std::floor(fy));
    double tx = fx - x0, ty = fy - y0;
    auto wrap_x = [&](int x) { return ((x % width) + width) % width; };
    auto clamp_y = [&](int y) { return std::clamp(y, 0, height - 1); };
    BilinearTaps taps;
    taps.x = {wrap_x(x0), wrap_x(x0 + 1), wrap_x(x0), wrap_x(x0 + 1)};
    taps.y = {clamp_y(y0), clamp_y(y0), clamp_y(y0 + 1), clamp_y(y0 + 1)};
    taps.w = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    return taps;
}

Vec3 sample_latlong(const Image& img, const Vec3& dir) {
    Vec2 uv = direction_to_latlong(dir);
    BilinearTaps t = latlong_taps(img.width(), img.height(), uv.x, uv.y);
    Vec3 out{0, 0, 0};
    for (int i = 0; i < 4; i++) out += img.pixel3(t.y[i], t.x[i]) * t.w[i];
    return out;
}

Image upsample_latlong(const Image& coarse, int width, int height) {
    Image out(width, height, coarse.channels());
    for (int y = 0; y < height; y++) {
        double v = (y + 0.5) / height;
        for (int x = 0; x < width; x++) {
            double u = (x + 0.5) / width;
            BilinearTaps t = latlong_taps(coarse.width(), coarse.height(), u, v);
            for (int c = 0; c < coarse.channels(); c++) {
                double s = 0;
                for (int i = 0; i < 4; i++) s += coarse.at(t.y[i], t.x[i], c) * t.w[i];
                out.at(y, x, c) = s;
            }
        }
    }
    return out;
}

void upsample_latlong_adjoint(const Image& grad_out, Image& grad_coarse) {
    for (int y = 0; y < grad_out.height(); y++) {
        double v = (y + 0.5) / grad_out.height();
        for (int x = 0; x < grad_out.width(); x++) {
            double u = (x + 0.5) / grad_out.width();
            BilinearTaps t = latlong_taps(grad_coarse.width(), grad_coarse.height(), u, v);
            for (int c = 0; c < grad_out.channels(); c++) {
                double g = grad_out.at(y, x, c);
                if (g == 0) continue;
                for (int i = 0; i < 4; i++) grad_coarse.at(t.y[i], t.x[i], c) += g * t.w[i];
            }
        }
    }
}

void EnvironmentLight::validate_radiance() const {
    if (radiance.empty() || radiance.channels() != 3)
        throw std::invalid_argument("environment: radiance map missing or not RGB");
    if (radiance.width() != 2 * radiance.height())
        throw std::invalid_argument("environment: aspect ratio must be 2:1 (W = 2H)");
    for (double v : radiance.raw())
        if (!std::isfinite(v) || v < 0)
            throw std::invalid_argument("environment: texels must be finite and >= 0");
}

Vec3 EnvironmentLight::sample_prefiltered(const Vec3& dir, double roughness) const {
    int levels = int(prefiltered.size());
    double fl = std::clamp(roughness, 0.0, 1.0) * (levels - 1);
    int l0 = std::min(int(fl), levels - 1);
    int l1 = std::min(l0 + 1, levels - 1);
    double t = fl - l0;
    Vec3 a = sample_latlong(prefiltered[l0], dir);
    if (l1 == l0 || t == 0) return a;
    return lerp(a, sample_latlong(prefiltered[l1], dir), t);
}

Vec2 EnvironmentLight::sample_lut(double n_dot_v, double roughness) const {
    // clamped bilinear over texel centers
    auto tap = [&](double q) {
        double f = std::clamp(q, 0.0, 1.0) * lut_size - 0.5;
        int i0 = std::clamp(int(std::floor(f)), 0, lut_size - 1);
        int i1 = std::min(i0 + 1, lut_size - 1);
        double t = std::clamp(f - i0, 0.0, 1.0);
        return std::tuple<int, int, double>{i0, i1, t};
    };
    auto [x0, x1, tx] = tap(n_dot_v);
    auto [y0, y1, ty] = tap(roughness);
    auto texel = [&](int x, int y, int c) { return lut[(size_t(y) * lut_size + x) * 2 + c]; };
    Vec2 out;
    for (int c = 0; c < 2; c++) {
        double v0 = texel(x0, y0, c) * (1 - tx) + texel(x1, y0, c) * tx;
        double v1 = texel(x0, y1, c) * (1 - tx) + texel(x1, y1, c) * tx;
        (&out.x)[c] = v0 * (1 - ty) + v1 * ty;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Split-sum precompute. All sample sets are low-discrepancy (Hammersley), so
// the tables are pure deterministic functions of the radiance map and can be
// re-walked for the adjoint pass.
// ---------------------------------------------------------------------------

namespace {

double radical_inverse(uint32_t bits) {
    bits = (bits << 16u) | (bits >> 16u);
    bits = ((bits & 0x55555555u) << 1u) | ((bits & 0xAAAAAAAAu) >> 1u);
    bits = ((bits & 0x33333333u) << 2u) | ((bits & 0xCCCCCCCCu) >> 2u);
    bits = ((bits & 0x0F0F0F0Fu) << 4u) | ((bits & 0xF0F0F0F0u) >> 4u);
    bits = ((bits & 0x00FF00FFu) << 8u) | ((bits & 0xFF00FF00u) >> 8u);
    return double(bits) * 2.3283064365386963e-10;
}

Vec2 hammersley(uint32_t i, uint32_t n) { return {(i + 0.5) / n, radical_inverse(i)}; }

/// GGX NDF-importance half-vector about +z (tangent space).
Vec3 ggx_half_vector(const Vec2& u, double alpha) {
    double a2 = alpha * alpha;
    double cos2 = (1.0 - u.x) / (1.0 + (a2 - 1.0) * u.x);
    double cos_t = std::sqrt(std::max(cos2, 0.0));
    double sin_t = std::sqrt(std::max(1.0 - cos2, 0.0));
    double phi = 2.0 * kPi * u.y;
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

struct PrefilterTap {
    Vec3 dir;
    double weight;
};

/// The prefilter sample set for one output direction at one roughness;
/// weights are already normalized to sum to 1.
void prefilter_taps(const Vec3& r, double roughness, int samples, std::vector<PrefilterTap>& out) {
    out.clear();
    if (roughness <= 0) {
        out.push_back({r, 1.0});
        return;
    }
    double alpha = roughness * roughness;
    Vec3 t, b;
    orthonormal_basis(r, t, b);
    double total = 0;
    for (int i = 0; i < samples; i++) {
        Vec3 hl = ggx_half_vector(hammersley(uint32_t(i), uint32_t(samples)), alpha);
        Vec3 h = t * hl.x + b * hl.y + r * hl.z;
        Vec3 wi = reflect(r, h);
        double w = dot(r, wi);
        if (w <= 0) continue;
        out.push_back({wi, w});
        total += w;
    }
    if (out.empty()) {
        out.push_back({r, 1.0});
        return;
    }
    for (auto& tap : out) tap.weight /= total;
}

int mip_height(int base_height, int level) { return std::max(2, base_height >> level); }

}  // namespace

void precompute_radiance_tables(EnvironmentLight& env, const SplitSumParams& params) {
    env.validate_radiance();
    const int w = env.radiance.width(), h = env.radiance.height();

    // roughness pyramid
    env.prefiltered.assign(size_t(params.mips), Image{});
    env.prefiltered[0] = env.radiance;
    for (int l = 1; l < params.mips; l++) {
        int hl = mip_height(h, l), wl = 2 * hl;
        double rho = double(l) / (params.mips - 1);
        Image& out = env.prefiltered[l];
        out = Image(wl, hl, 3);
        parallel_for(size_t(hl), [&](size_t yy) {
            int y = int(yy);
            std::vector<PrefilterTap> taps;
            for (int x = 0; x < wl; x++) {
                Vec3 r = latlong_to_direction((x + 0.5) / wl, (y + 0.5) / hl);
                prefilter_taps(r, rho, params.prefilter_samples, taps);
                Vec3 sum{0, 0, 0};
                for (const auto& tap : taps) sum += sample_latlong(env.radiance, tap.dir) * tap.weight;
                out.set_pixel3(y, x, sum);
            }
        });
    }

    // cosine-convolved irradiance (normalized weights: a constant map stays
    // exactly constant)
    {
        int hi = std::min(params.irradiance_width / 2, h), wi = 2 * hi;
        env.irradiance = Image(wi, hi, 3);
        parallel_for(size_t(hi), [&](size_t yy) {
            int y = int(yy);
            for (int x = 0; x < wi; x++) {
                Vec3 n = latlong_to_direction((x + 0.5) / wi, (y + 0.5) / hi);
                Vec3 sum{0, 0, 0};
                double total = 0;
                for (int sy = 0; sy < h; sy++) {
                    double sin_theta = std::sin((sy + 0.5) / h * kPi);
                    for (int sx = 0; sx < w; sx++) {
                        Vec3 d = latlong_to_direction((sx + 0.5) / w, (sy + 0.5) / h);
                        double c = dot(n, d);
                        if (c <= 0) continue;
                        double wgt = c * sin_theta;
                        sum += env.radiance.pixel3(sy, sx) * wgt;
                        total += wgt;
                    }
                }
                env.irradiance.set_pixel3(y, x, total > 0 ? sum / total : Vec3{0, 0, 0});
            }
        });
    }
}

void precompute_brdf_lut(EnvironmentLight& env, const SplitSumParams& params) {
    // scale/bias BRDF integration table over (n.v, roughness)
    {
        env.lut_size = params.lut_size;
        env.lut.assign(size_t(params.lut_size) * params.lut_size * 2, 0.0);
        const int n = params.lut_size;
        parallel_for(size_t(n), [&](size_t jj) {
            int j = int(jj);  // roughness row
            double rho = (j + 0.5) / n;
            double alpha = rho * rho;
            for (int i = 0; i < n; i++) {
                double nv = (i + 0.5) / n;
                Vec3 normal{0, 0, 1};
                Vec3 wo{std::sqrt(std::max(0.0, 1.0 - nv * nv)), 0, nv};
                double a = 0, b = 0;
                for (int s = 0; s < params.lut_samples; s++) {
                    Vec3 hv = ggx_half_vector(hammersley(uint32_t(s), uint32_t(params.lut_samples)), alpha);
                    Vec3 wi = reflect(wo, hv);
                    if (wi.z <= 0) continue;
                    double n_i = wi.z, n_h = std::max(hv.z, 0.0), h_o = std::max(dot(hv, wo), 0.0);
                    double g = smith_g(n_i, nv, alpha);
                    double g_vis = g * h_o / std::max(n_h * nv, 1e-9);
                    double fc = std::pow(1.0 - h_o, 5.0);
                    a += (1.0 - fc) * g_vis;
                    b += fc * g_vis;
                }
                env.lut[(size_t(j) * n + i) * 2 + 0] = a / params.lut_samples;
                env.lut[(size_t(j) * n + i) * 2 + 1] = b / params.lut_samples;
            }
        });
    }
}

void precompute_splitsum(EnvironmentLight& env, const SplitSumParams& params) {
    precompute_radiance_tables(env, params);
    precompute_brdf_lut(env, params);
}

SplitSumShade shade_splitsum(const MaterialSample& mat, const Vec3& n, const Vec3& wo,
                             const EnvironmentLight& env) {
    SplitSumShade out;
    Vec3 irr = env.sample_irradiance(n);
    out.diffuse_light = irr;
    Vec3 r = reflect(wo, n);
    Vec3 pre = env.sample_prefiltered(r, mat.roughness);
    double nv = std::clamp(dot(n, wo), 0.0, 1.0);
    Vec2 ab = env.sample_lut(nv, mat.roughness);
    Vec3 f0 = mat.f0();
    out.specular_light = pre * (ab.x + ab.y);
    out.color = mat.albedo * irr * (1.0 - mat.metalness) + pre * (f0 * ab.x + Vec3{ab.y, ab.y, ab.y});
    return out;
}

SplitSumShadeGrad shade_splitsum_grad(const MaterialSample& mat, const Vec3& n, const Vec3& wo,
                                      const EnvironmentLight& env) {
    SplitSumShadeGrad g;
    const double m = mat.metalness, rho = mat.roughness;
    const Vec3 a = mat.albedo;

    Vec2 uv_n = direction_to_latlong(n);
    g.irradiance_taps = latlong_taps(env.irradiance.width(), env.irradiance.height(), uv_n.x, uv_n.y);
    Vec3 irr{0, 0, 0};
    for (int i = 0; i < 4; i++)
        irr += env.irradiance.pixel3(g.irradiance_taps.y[i], g.irradiance_taps.x[i]) *
               g.irradiance_taps.w[i];

    Vec3 r = reflect(wo, n);
    Vec2 uv_r = direction_to_latlong(r);
    const int levels = int(env.prefiltered.size());
    double fl = std::clamp(rho, 0.0, 1.0) * (levels - 1);
    int l0 = std::min(int(fl), levels - 1);
    int l1 = std::min(l0 + 1, levels - 1);
    double lt = fl - l0;
    g.prefiltered_level = {l0, l1};
    g.prefiltered_level_w = {1.0 - lt, l1 == l0 ? 0.0 : lt};
    Vec3 pre_level[2] = {{0, 0, 0}, {0, 0, 0}};
    for (int li = 0; li < 2; li++) {
        const Image& img = env.prefiltered[size_t(g.prefiltered_level[li])];
        g.prefiltered_taps[li] = latlong_taps(img.width(), img.height(), uv_r.x, uv_r.y);
        for (int i = 0; i < 4; i++)
            pre_level[li] += img.pixel3(g.prefiltered_taps[li].y[i], g.prefiltered_taps[li].x[i]) *
                             g.prefiltered_taps[li].w[i];
    }
    Vec3 pre = pre_level[0] * g.prefiltered_level_w[0] + pre_level[1] * g.prefiltered_level_w[1];
    // mip lerp derivative in roughness (piecewise linear)
    Vec3 dpre_drho = (l1 > l0) ? (pre_level[1] - pre_level[0]) * double(levels - 1) : Vec3{0, 0, 0};

    double nv = std::clamp(dot(n, wo), 0.0, 1.0);
    Vec2 ab = env.sample_lut(nv, rho);
    // LUT derivative along roughness by central texel difference of the
    // bilinear interpolation (piecewise linear in rho)
    const double drho_step = 1.0 / env.lut_size;
    Vec2 ab_hi = env.sample_lut(nv, std::min(rho + 0.5 * drho_step, 1.0));
    Vec2 ab_lo = env.sample_lut(nv, std::max(rho - 0.5 * drho_step, 0.0));
    double d_a_drho = (ab_hi.x - ab_lo.x) / drho_step;
    double d_b_drho = (ab_hi.y - ab_lo.y) / drho_step;

    Vec3 f0 = mat.f0();
    g.value.diffuse_light = irr;
    g.value.specular_light = pre * (ab.x + ab.y);
    g.value.color = a * irr * (1.0 - m) + pre * (f0 * ab.x + Vec3{ab.y, ab.y, ab.y});

    for (int c = 0; c < 3; c++) {
        g.d_albedo[c] = (1.0 - m) * irr[c] + pre[c] * ab.x * m;
        g.d_metalness[c] = -a[c] * irr[c] + pre[c] * ab.x * (a[c] - 0.04);
        g.d_roughness[c] = dpre_drho[c] * (f0[c] * ab.x + ab.y) +
                           pre[c] * (f0[c] * d_a_drho + d_b_drho);
        g.d_spec_light_d_rough[c] = dpre_drho[c] * (ab.x + ab.y) + pre[c] * (d_a_drho + d_b_drho);
        g.prefiltered_factor[c] = f0[c] * ab.x + ab.y;
        g.spec_light_prefilter_factor[c] = ab.x + ab.y;
    }
    g.irradiance_factor = a * (1.0 - m);
    return g;
}

void EnvTableGrad::init(const EnvironmentLight& env) {
    d_irradiance = Image(env.irradiance.width(), env.irradiance.height(), 3);
    d_prefiltered.clear();
    for (const auto& img : env.prefiltered) d_prefiltered.emplace_back(img.width(), img.height(), 3);
}

void EnvTableGrad::accumulate(const SplitSumShadeGrad& g, const Vec3& d_color,
                              const Vec3& d_diffuse_light, const Vec3& d_spec_light) {
    for (int i = 0; i < 4; i++) {
        double w = g.irradiance_taps.w[i];
        int x = g.irradiance_taps.x[i], y = g.irradiance_taps.y[i];
        for (int c = 0; c < 3; c++)
            d_irradiance.at(y, x, c) +=
                w * (d_color[c] * g.irradiance_factor[c] + d_diffuse_light[c]);
    }
    for (int li = 0; li < 2; li++) {
        double lw = g.prefiltered_level_w[li];
        if (lw == 0) continue;
        Image& dst = d_prefiltered[size_t(g.prefiltered_level[li])];
        for (int i = 0; i < 4; i++) {
            double w = lw * g.prefiltered_taps[li].w[i];
            int x = g.prefiltered_taps[li].x[i], y = g.prefiltered_taps[li].y[i];
            for (int c = 0; c < 3; c++)
                dst.at(y, x, c) += w * (d_color[c] * g.prefiltered_factor[c] +
                                        d_spec_light[c] * g.spec_light_prefilter_factor[c]);
        }
    }
}

Image backprop_tables_to_radiance(const EnvironmentLight& env, const SplitSumParams& params,
                                  const EnvTableGrad& grad) {
    const int w = env.radiance.width(), h = env.radiance.height();
    Image d_radiance(w, h, 3);

    // mip 0 is the radiance itself
    if (!grad.d_prefiltered.empty()) {
        for (size_t i = 0; i < d_radiance.size(); i++)
            d_radiance.raw()[i] += grad.d_prefiltered[0].raw()[i];
    }

    // higher mips: redistribute through the (normalized) prefilter weights
    for (int l = 1; l < int(grad.d_prefiltered.size()); l++) {
        const Image& g = grad.d_prefiltered[size_t(l)];
        int hl = g.height(), wl = g.width();
        double rho = double(l) / (params.mips - 1);
        std::vector<PrefilterTap> taps;
        for (int y = 0; y < hl; y++) {
            for (int x = 0; x < wl; x++) {
                Vec3 gv = g.pixel3(y, x);
                if (gv.x == 0 && gv.y == 0 && gv.z == 0) continue;
                Vec3 r = latlong_to_direction((x + 0.5) / wl, (y + 0.5) / hl);
                prefilter_taps(r, rho, params.prefilter_samples, taps);
                for (const auto& tap : taps) {
                    Vec2 uv = direction_to_latlong(tap.dir);
                    BilinearTaps bt = latlong_taps(w, h, uv.x, uv.y);
                    for (int i = 0; i < 4; i++) {
                        for (int c = 0; c < 3; c++)
                            d_radiance.at(bt.y[i], bt.x[i], c) += gv[c] * tap.weight * bt.w[i];
                    }
                }
            }
        }
    }

    // irradiance adjoint: same normalized cosine quadrature, transposed
    if (!grad.d_irradiance.empty()) {
        int hi = grad.d_irradiance.height(), wi = grad.d_irradiance.width();
        for (int y = 0; y < hi; y++) {
            for (int x = 0; x < wi; x++) {
                Vec3 gv = grad.d_irradiance.pixel3(y, x);
                if (gv.x == 0 && gv.y == 0 && gv.z == 0) continue;
                Vec3 n = latlong_to_direction((x + 0.5) / wi, (y + 0.5) / hi);
                double total = 0;
                for (int sy = 0; sy < h; sy++) {
                    double sin_theta = std::sin((sy + 0.5) / h * kPi);
                    for (int sx = 0; sx < w; sx++) {
                        double c = dot(n, latlong_to_direction((sx + 0.5) / w, (sy + 0.5) / h));
                        if (c > 0) total += c * sin_theta;
                    }
                }
                if (total <= 0) continue;
                for (int sy = 0; sy < h; sy++) {
                    double sin_theta = std::sin((sy + 0.5) / h * kPi);
                    for (int sx = 0; sx < w; sx++) {
                        double c = dot(n, latlong_to_direction((sx + 0.5) / w, (sy + 0.5) / h));
                        if (c <= 0) continue;
                        double wgt = c * sin_theta / total;
                        for (int ch = 0; ch < 3; ch++)
                            d_radiance.at(sy, sx, ch) += gv[ch] * wgt;
                    }
                }
            }
        }
    }
    return d_radiance;
}

// Cache ---------------------------------------------------------------------

uint64_t splitsum_cache_key(const EnvironmentLight& env, const SplitSumParams& params) {
    uint64_t hash = 1469598103934665603ull;  // FNV-1a
    auto mix_bytes = [&](const void* p, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; i++) {
            hash ^= b[i];
            hash *= 1099511628211ull;
        }
    };
    int meta[7] = {env.radiance.width(), env.radiance.height(), params.mips,
                   params.lut_size, params.lut_samples, params.prefilter_samples,
                   params.irradiance_width};
    mix_bytes(meta, sizeof(meta));
    mix_bytes(env.radiance.data(), env.radiance.size() * sizeof(double));
    return hash;
}

void save_splitsum_cache(const EnvironmentLight& env, const SplitSumParams& params,
                         const std::string& path) {
    if (!env.tables_ready()) throw std::runtime_error("splitsum cache: tables not precomputed");
    std::vector<double> payload;
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& img : env.prefiltered) {
        levels.push_back({img.width(), img.height()});
        payload.insert(payload.end(), img.raw().begin(), img.raw().end());
    }
    payload.insert(payload.end(), env.irradiance.raw().begin(), env.irradiance.raw().end());
    payload.insert(payload.end(), env.lut.begin(), env.lut.end());
    nlohmann::json header{
        {"kind", "splitsum_tables"},
        {"key", splitsum_cache_key(env, params)},
        {"prefiltered", levels},
        {"irradiance", {env.irradiance.width(), env.irradiance.height()}},
        {"lut_size", env.lut_size},
        {"dtype", "float64"},
    };
    save_blob(path, header, payload.data(), payload.size() * sizeof(double));
}

bool load_splitsum_cache(EnvironmentLight& env, const SplitSumParams& params,
                         const std::string& path) {
    std::vector<unsigned char> payload;
    nlohmann::json header;
    try {
        header = load_blob(path, payload);
    } catch (const std::exception&) {
        return false;
    }
    if (header.value("kind", "") != "splitsum_tables") return false;
    if (header.value("key", uint64_t(0)) != splitsum_cache_key(env, params)) return false;

    const double* p = reinterpret_cast<const double*>(payload.data());
    size_t remaining = payload.size() / sizeof(double);
    auto take = [&](Image& img, int w, int h) {
        img = Image(w, h, 3);
        size_t n = img.size();
        if (remaining < n) throw std::runtime_error("splitsum cache truncated: " + path);
        std::memcpy(img.data(), p, n * sizeof(double));
        p += n;
        remaining -= n;
    };
    env.prefiltered.clear();
    for (const auto& lv : header.at("prefiltered")) {
        Image img;
        take(img, lv[0], lv[1]);
        env.prefiltered.push_back(std::move(img));
    }
    take(env.irradiance, header.at("irradiance")[0], header.at("irradiance")[1]);
    env.lut_size = header.at("lut_size");
    size_t lut_n = size_t(env.lut_size) * env.lut_size * 2;
    if (remaining != lut_n) throw std::runtime_error("splitsum cache truncated: " + path);
    env.lut.assign(p, p + lut_n);
    return true;
}

// Indirect light -------------------------------------------------------------

double sh_basis(int index, const Vec3& d) {
    switch (index) {
        case 0: return 0.28209479177387814;
        case 1: return 0.4886025119029199 * d.y;
        case 2: return 0.4886025119029199 * d.z;
        case 3: return 0.4886025119029199 * d.x;
        case 4: return 1.0925484305920792 * d.x * d.y;
        case 5: return 1.0925484305920792 * d.y * d.z;
        case 6: return 0.31539156525252005 * (3.0 * d.z * d.z - 1.0);
        case 7: return 1.0925484305920792 * d.x * d.z;
        case 8: return 0.5462742152960396 * (d.x * d.x - d.y * d.y);
        default: return 0;
    }
}

void IndirectLight::basis(const Vec3& dir, double* out) const {
    int n = int(coefficients.size());
    for (int i = 0; i < n; i++) out[i] = sh_basis(i, dir);
}

Vec3 IndirectLight::eval(const Vec3& dir) const {
    Vec3 sum{0, 0, 0};
    for (size_t i = 0; i < coefficients.size(); i++) sum += coefficients[i] * sh_basis(int(i), dir);
    return max(sum, Vec3{0, 0, 0});
}

void IndirectLight::validate() const {
    if (degree < 0 || degree > 2) throw std::invalid_argument("indirect light: degree must be 0..2");
    if (coefficients.size() != size_t(degree + 1) * (degree + 1))
        throw std::invalid_argument("indirect light: coefficient count does not match degree");
}

Vec3 compose_incident(const EnvironmentLight& env, const IndirectLight& indirect, double occlusion,
                      const Vec3& wi) {
    double o = std::clamp(occlusion, 0.0, 1.0);
    Vec3 direct = o < 1.0 ? env.sample_radiance(wi) : Vec3{0, 0, 0};
    Vec3 ind = o > 0.0 ? indirect.eval(wi) : Vec3{0, 0, 0};
    return direct * (1.0 - o) + ind * o;
}

}  // namespace geosplat
