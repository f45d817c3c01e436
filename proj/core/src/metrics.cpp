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

#include "geosplat/metrics.hpp"

#include <stdexcept>

#include "geosplat/splat.hpp"
#include "geosplat/transport.hpp"

namespace geosplat {

double psnr(const Image& pred, const Image& gt) {
    if (!pred.same_shape(gt)) throw std::invalid_argument("psnr: shape mismatch");
    double mse = 0;
    for (size_t i = 0; i < pred.size(); i++) {
        double d = std::clamp(pred.raw()[i], 0.0, 1.0) - std::clamp(gt.raw()[i], 0.0, 1.0);
        mse += d * d;
    }
    mse /= double(pred.size());
    if (mse == 0) return kInf;
    return 10.0 * std::log10(1.0 / mse);
}

// SSIM ------------------------------------------------------------------------

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWindow>& gaussian_window() {
    static const std::array<double, kWindow> w = [] {
        std::array<double, kWindow> v{};
        double sum = 0;
        for (int i = 0; i < kWindow; i++) {
            double d = i - kHalf;
            v[size_t(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += v[size_t(i)];
        }
        for (auto& x : v) x /= sum;
        return v;
    }();
    return w;
}

/// Separable correlation with the Gaussian window; output defined on the
/// valid region [kHalf, dim - kHalf), zero elsewhere.
Image filter_valid(const Image& src) {
    const auto& win = gaussian_window();
    const int w = src.width(), h = src.height(), ch = src.channels();
    Image tmp(w, h, ch, 0.0);
    for (int y = 0; y < h; y++)
        for (int x = kHalf; x < w - kHalf; x++)
            for (int c = 0; c < ch; c++) {
                double s = 0;
                for (int k = -kHalf; k <= kHalf; k++)
                    s += win[size_t(k + kHalf)] * src.at(y, x + k, c);
                tmp.at(y, x, c) = s;
            }
    Image out(w, h, ch, 0.0);
    for (int y = kHalf; y < h - kHalf; y++)
        for (int x = kHalf; x < w - kHalf; x++)
            for (int c = 0; c < ch; c++) {
                double s = 0;
                for (int k = -kHalf; k <= kHalf; k++)
                    s += win[size_t(k + kHalf)] * tmp.at(y + k, x, c);
                out.at(y, x, c) = s;
            }
    return out;
}

struct SsimFields {
    Image mu_a, mu_b, s_aa, s_bb, s_ab;  // filtered moments
    int x0, x1, y0, y1;                  // valid center range
    size_t n_valid;
};

SsimFields ssim_moments(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    if (a.width() < kWindow || a.height() < kWindow)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");
    SsimFields f{filter_valid(a), filter_valid(b), Image{}, Image{}, Image{}, 0, 0, 0, 0, 0};
    Image aa(a.width(), a.height(), a.channels());
    Image bb(a.width(), a.height(), a.channels());
    Image ab(a.width(), a.height(), a.channels());
    for (size_t i = 0; i < a.size(); i++) {
        aa.raw()[i] = a.raw()[i] * a.raw()[i];
        bb.raw()[i] = b.raw()[i] * b.raw()[i];
        ab.raw()[i] = a.raw()[i] * b.raw()[i];
    }
    f.s_aa = filter_valid(aa);
    f.s_bb = filter_valid(bb);
    f.s_ab = filter_valid(ab);
    f.x0 = kHalf;
    f.x1 = a.width() - kHalf;
    f.y0 = kHalf;
    f.y1 = a.height() - kHalf;
    f.n_valid = size_t(f.x1 - f.x0) * size_t(f.y1 - f.y0) * size_t(a.channels());
    return f;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    SsimFields f = ssim_moments(a, b);
    double total = 0;
    for (int y = f.y0; y < f.y1; y++)
        for (int x = f.x0; x < f.x1; x++)
            for (int c = 0; c < a.channels(); c++) {
                double ma = f.mu_a.at(y, x, c), mb = f.mu_b.at(y, x, c);
                double va = f.s_aa.at(y, x, c) - ma * ma;
                double vb = f.s_bb.at(y, x, c) - mb * mb;
                double cov = f.s_ab.at(y, x, c) - ma * mb;
                double s = ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
                           ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
                total += s;
            }
    return total / double(f.n_valid);
}

double ssim_with_gradient(const Image& a, const Image& b, Image& d_ssim_da) {
    SsimFields f = ssim_moments(a, b);
    const int w = a.width(), h = a.height(), ch = a.channels();
    // Per-center coefficient fields of the local gradient
    //   dS/da_i = w_i * (c0 + cb * b_i + ca * a_i),
    // so the pixel gradient is a window correlation of the coefficients.
    Image c0(w, h, ch, 0.0), cb(w, h, ch, 0.0), ca(w, h, ch, 0.0);
    double total = 0;
    for (int y = f.y0; y < f.y1; y++)
        for (int x = f.x0; x < f.x1; x++)
            for (int c = 0; c < ch; c++) {
                double ma = f.mu_a.at(y, x, c), mb = f.mu_b.at(y, x, c);
                double va = f.s_aa.at(y, x, c) - ma * ma;
                double vb = f.s_bb.at(y, x, c) - mb * mb;
                double cov = f.s_ab.at(y, x, c) - ma * mb;
                double a1 = 2 * ma * mb + kC1, a2 = 2 * cov + kC2;
                double b1 = ma * ma + mb * mb + kC1, b2 = va + vb + kC2;
                double denom = b1 * b2;
                double s = (a1 * a2) / denom;
                total += s;
                c0.at(y, x, c) =
                    (2 * mb * a2 - 2 * a1 * mb + s * (2 * b1 * ma - 2 * ma * b2)) / denom;
                cb.at(y, x, c) = 2 * a1 / denom;
                ca.at(y, x, c) = -2 * s * b1 / denom;
            }
    Image f0 = filter_valid(c0), fb = filter_valid(cb), fa = filter_valid(ca);
    d_ssim_da = Image(w, h, ch, 0.0);
    const double inv_n = 1.0 / double(f.n_valid);
    for (size_t i = 0; i < d_ssim_da.size(); i++)
        d_ssim_da.raw()[i] =
            inv_n * (f0.raw()[i] + fb.raw()[i] * b.raw()[i] + fa.raw()[i] * a.raw()[i]);
    return total / double(f.n_valid);
}

// Normal MAE --------------------------------------------------------------------

double normal_mae_degrees(const Image& pred, const Image& gt, const Image& mask) {
    if (!pred.same_shape(gt)) throw std::invalid_argument("normal_mae: shape mismatch");
    double sum = 0;
    size_t count = 0;
    for (int y = 0; y < pred.height(); y++)
        for (int x = 0; x < pred.width(); x++) {
            if (mask.at(y, x) <= 0.5) continue;
            Vec3 p = pred.pixel3(y, x), g = gt.pixel3(y, x);
            if (length(p) == 0 || length(g) == 0) continue;
            sum += degrees(angle_between(p, g));
            count++;
        }
    return count > 0 ? sum / double(count) : 0.0;
}

Vec3 albedo_scale_factors(const Image& pred, const Image& gt, const Image& mask) {
    Vec3 num{0, 0, 0}, den{0, 0, 0};
    for (int y = 0; y < pred.height(); y++)
        for (int x = 0; x < pred.width(); x++) {
            if (mask.at(y, x) <= 0.5) continue;
            Vec3 p = pred.pixel3(y, x), g = gt.pixel3(y, x);
            num += p * g;
            den += p * p;
        }
    Vec3 s{1, 1, 1};
    for (int c = 0; c < 3; c++)
        if (den[c] > 0) s[c] = num[c] / den[c];
    return s;
}

Image apply_channel_scale(const Image& img, const Vec3& scale) {
    Image out = img;
    for (int y = 0; y < out.height(); y++)
        for (int x = 0; x < out.width(); x++) out.set_pixel3(y, x, out.pixel3(y, x) * scale);
    return out;
}

ShapeConsistency shape_consistency(const Bvh& bvh, const GaussianSet& gaussians,
                                   const std::vector<View>& views) {
    ShapeConsistency out;
    const double diag = bvh.mesh().bounding_diagonal();
    double angle_sum = 0, dist_sum = 0;
    size_t co_hits = 0, splat_hits = 0;
    for (const View& view : views) {
        SplatCache cache = build_splat_cache(gaussians, view);
        std::vector<Vec3> normals(gaussians.size());
        for (size_t i = 0; i < gaussians.size(); i++) normals[i] = gaussians.points[i].normal;
        Image splat_normal = composite(cache, normals);
        RaycastResult rc = raycast_view(bvh, view);
        for (int y = 0; y < view.height; y++)
            for (int x = 0; x < view.width; x++) {
                if (cache.alpha.at(y, x) <= 0.5) continue;
                splat_hits++;
                if (rc.hit_mask.at(y, x) == 0) continue;
                Vec3 ns = normalize(splat_normal.pixel3(y, x));
                Vec3 nm = rc.normal.pixel3(y, x);
                if (length(ns) == 0 || length(nm) == 0) continue;
                Vec3 d = view.pixel_ray_direction(x, y);
                Vec3 rs = d - ns * (2.0 * dot(d, ns));
                Vec3 rm = d - nm * (2.0 * dot(d, nm));
                angle_sum += degrees(angle_between(rs, rm));
                dist_sum += std::abs(cache.depth.at(y, x) - rc.depth.at(y, x));
                co_hits++;
            }
    }
    out.coverage = splat_hits > 0 ? double(co_hits) / double(splat_hits) : 0.0;
    out.valid = out.coverage >= 0.01 && co_hits > 0;
    if (co_hits > 0) {
        out.reflection_mae_deg = angle_sum / double(co_hits);
        out.transfer_distance = dist_sum / double(co_hits) / diag;
    }
    return out;
}

}  // namespace geosplat
