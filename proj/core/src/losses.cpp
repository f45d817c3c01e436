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

#include "geosplat/losses.hpp"

#include <stdexcept>

#include "geosplat/metrics.hpp"

namespace geosplat {

PhotometricComponents photometric_loss(const Image& pred, const Image& alpha, const Image& gt,
                                       const Image& mask) {
    if (!pred.same_shape(gt) || !alpha.same_shape(mask))
        throw std::invalid_argument("photometric loss: dimension mismatch");
    PhotometricComponents out;
    out.l1 = mean_abs_diff(pred, gt);
    out.ssim_term = 1.0 - ssim(pred, gt);
    out.mask = mean_squared_diff(alpha, mask);
    return out;
}

PhotometricComponents photometric_loss_grad(const Image& pred, const Image& alpha, const Image& gt,
                                            const Image& mask, double ssim_w, double mask_w,
                                            Image& d_pred, Image& d_alpha) {
    if (!pred.same_shape(gt) || !alpha.same_shape(mask))
        throw std::invalid_argument("photometric loss: dimension mismatch");
    PhotometricComponents out;

    d_pred = Image(pred.width(), pred.height(), pred.channels(), 0.0);
    const double inv_n = 1.0 / double(pred.size());
    double l1 = 0;
    for (size_t i = 0; i < pred.size(); i++) {
        double d = pred.raw()[i] - gt.raw()[i];
        l1 += std::abs(d);
        d_pred.raw()[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) * inv_n;
    }
    out.l1 = l1 * inv_n;

    Image d_ssim;
    double s = ssim_with_gradient(pred, gt, d_ssim);
    out.ssim_term = 1.0 - s;
    for (size_t i = 0; i < pred.size(); i++) d_pred.raw()[i] -= ssim_w * d_ssim.raw()[i];

    d_alpha = Image(alpha.width(), alpha.height(), 1, 0.0);
    const double inv_m = 1.0 / double(alpha.size());
    double msq = 0;
    for (size_t i = 0; i < alpha.size(); i++) {
        double d = alpha.raw()[i] - mask.raw()[i];
        msq += d * d;
        d_alpha.raw()[i] = mask_w * 2.0 * d * inv_m;
    }
    out.mask = msq * inv_m;
    return out;
}

double light_regularizer(const Image& diffuse_light, const Image& specular_light, const Image& gt) {
    if (!diffuse_light.same_shape(specular_light) || !diffuse_light.same_shape(gt))
        throw std::invalid_argument("light regularizer: dimension mismatch");
    double sum = 0;
    const size_t n = size_t(gt.width()) * gt.height();
    for (int y = 0; y < gt.height(); y++)
        for (int x = 0; x < gt.width(); x++) {
            Vec3 l = diffuse_light.pixel3(y, x) + specular_light.pixel3(y, x);
            sum += std::abs(mean_component(l) - max_component(gt.pixel3(y, x)));
        }
    return sum / double(n);
}

double light_regularizer_grad(const Image& diffuse_light, const Image& specular_light,
                              const Image& gt, Image& d_diffuse, Image& d_specular) {
    if (!diffuse_light.same_shape(specular_light) || !diffuse_light.same_shape(gt))
        throw std::invalid_argument("light regularizer: dimension mismatch");
    d_diffuse = Image(gt.width(), gt.height(), 3, 0.0);
    d_specular = Image(gt.width(), gt.height(), 3, 0.0);
    double sum = 0;
    const size_t n = size_t(gt.width()) * gt.height();
    const double inv_n = 1.0 / double(n);
    for (int y = 0; y < gt.height(); y++)
        for (int x = 0; x < gt.width(); x++) {
            Vec3 l = diffuse_light.pixel3(y, x) + specular_light.pixel3(y, x);
            double d = mean_component(l) - max_component(gt.pixel3(y, x));
            sum += std::abs(d);
            double g = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) * inv_n / 3.0;
            d_diffuse.set_pixel3(y, x, {g, g, g});
            d_specular.set_pixel3(y, x, {g, g, g});
        }
    return sum * inv_n;
}

double sdf_weight_at(const LossWeights& w, int iteration, int total_iterations) {
    if (total_iterations <= 0) return w.sdf;
    double half = 0.5 * total_iterations;
    if (iteration >= half) return w.sdf_end;
    double t = iteration / half;
    return w.sdf * (1.0 - t) + w.sdf_end * t;
}

}  // namespace geosplat
