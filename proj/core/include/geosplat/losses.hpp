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

#include "geosplat/config.hpp"
#include "geosplat/image.hpp"

namespace geosplat {

/// Per-term training losses plus the weights they were combined with.
/// total = l1 + ssim_w*ssim_term + mask_w*mask + sdf_w*entropy
///       + smooth_w*smoothness + light_w*light_reg, exactly.
struct LossReport {
    double l1 = 0;
    double ssim_term = 0;  // 1 - SSIM(pred, gt)
    double mask = 0;
    double entropy = 0;
    double smoothness = 0;
    double light_reg = 0;
    double ssim_w = 0, mask_w = 0, sdf_w = 0, smooth_w = 0, light_w = 0;
    double total = 0;

    double recompute_total() const {
        return l1 + ssim_w * ssim_term + mask_w * mask + sdf_w * entropy + smooth_w * smoothness +
               light_w * light_reg;
    }
    void finalize() { total = recompute_total(); }
};

struct PhotometricComponents {
    double l1 = 0;
    double ssim_term = 0;
    double mask = 0;
};

/// L1 + (1 - SSIM) + mask-MSE components (unweighted).
PhotometricComponents photometric_loss(const Image& pred, const Image& alpha, const Image& gt,
                                       const Image& mask);

/// Components plus gradients w.r.t. the predicted image and alpha, already
/// weighted: d(l1 + ssim_w*(1-ssim))/d pred and d(mask_w*maskMSE)/d alpha.
PhotometricComponents photometric_loss_grad(const Image& pred, const Image& alpha, const Image& gt,
                                            const Image& mask, double ssim_w, double mask_w,
                                            Image& d_pred, Image& d_alpha);

/// Monochrome light regularizer: mean |Y(L_d + L_s) - V(I_gt)| with
/// Y = channel mean and V = channel max.
double light_regularizer(const Image& diffuse_light, const Image& specular_light, const Image& gt);

/// Value plus gradients w.r.t. both demodulated light images (both receive
/// sign/3 per channel).
double light_regularizer_grad(const Image& diffuse_light, const Image& specular_light,
                              const Image& gt, Image& d_diffuse, Image& d_specular);

/// The lambda_sdf schedule: linear from w.sdf to w.sdf_end over the first
/// half of the run, constant afterwards.
double sdf_weight_at(const LossWeights& w, int iteration, int total_iterations);

}  // namespace geosplat
