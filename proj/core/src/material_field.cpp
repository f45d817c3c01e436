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

#include "geosplat/material_field.hpp"

#include <cstring>
#include <stdexcept>

#include "geosplat/blob_io.hpp"

namespace geosplat {

MaterialField::MaterialField(const Box3& bounds, const std::vector<int>& level_resolutions,
                             double initial_raw) {
    if (bounds.empty()) throw std::invalid_argument("material field: empty bounds");
    if (level_resolutions.empty())
        throw std::invalid_argument("material field: need at least one level");
    bounds_ = bounds;
    size_t offset = 0;
    for (int res : level_resolutions) {
        if (res < 2) throw std::invalid_argument("material field: level resolution must be >= 2");
        levels_.push_back({res, offset});
        offset += size_t(res) * res * res * kMaterialChannels;
    }
    parameters_.assign(offset, initial_raw);
}

MaterialField MaterialField::for_bounds(const Box3& bounds) {
    Box3 padded = bounds;
    Vec3 pad = bounds.extent() * 0.05;
    padded.lo -= pad;
    padded.hi += pad;
    return MaterialField(padded, {16, 32, 64});
}

size_t MaterialField::parameter_index(int level, int x, int y, int z, int channel) const {
    const Level& l = levels_[size_t(level)];
    return l.offset +
           ((size_t(z) * l.resolution + y) * l.resolution + x) * kMaterialChannels + channel;
}

namespace {
struct CellTaps {
    int x0, y0, z0;
    double tx, ty, tz;
    bool clamped;
};

CellTaps locate(const Box3& bounds, int res, const Vec3& p) {
    CellTaps t;
    Vec3 e = bounds.extent();
    Vec3 q{(p.x - bounds.lo.x) / e.x, (p.y - bounds.lo.y) / e.y, (p.z - bounds.lo.z) / e.z};
    t.clamped = q.x < 0 || q.x > 1 || q.y < 0 || q.y > 1 || q.z < 0 || q.z > 1;
    q = clamp(q, 0.0, 1.0);
    double fx = q.x * (res - 1), fy = q.y * (res - 1), fz = q.z * (res - 1);
    t.x0 = std::min(int(fx), res - 2);
    t.y0 = std::min(int(fy), res - 2);
    t.z0 = std::min(int(fz), res - 2);
    t.tx = fx - t.x0;
    t.ty = fy - t.y0;
    t.tz = fz - t.z0;
    return t;
}
}  // namespace

std::array<double, kMaterialChannels> MaterialField::query_raw(const Vec3& position) const {
    std::array<double, kMaterialChannels> raw{};
    for (size_t li = 0; li < levels_.size(); li++) {
        const Level& level = levels_[li];
        CellTaps t = locate(bounds_, level.resolution, position);
        for (int dz = 0; dz < 2; dz++)
            for (int dy = 0; dy < 2; dy++)
                for (int dx = 0; dx < 2; dx++) {
                    double w = (dx ? t.tx : 1 - t.tx) * (dy ? t.ty : 1 - t.ty) *
                               (dz ? t.tz : 1 - t.tz);
                    if (w == 0) continue;
                    size_t base =
                        parameter_index(int(li), t.x0 + dx, t.y0 + dy, t.z0 + dz, 0);
                    for (int c = 0; c < kMaterialChannels; c++) raw[c] += w * parameters_[base + c];
                }
    }
    return raw;
}

MaterialSample MaterialField::query(const Vec3& position) const {
    auto raw = query_raw(position);
    return MaterialSample({logistic(raw[0]), logistic(raw[1]), logistic(raw[2])},
                          logistic(raw[3]), logistic(raw[4]));
}

MaterialField::QueryGrad MaterialField::query_with_gradient(const Vec3& position) const {
    QueryGrad out;
    std::array<double, kMaterialChannels> raw{};
    out.taps.reserve(levels_.size() * 8);
    for (size_t li = 0; li < levels_.size(); li++) {
        const Level& level = levels_[li];
        CellTaps t = locate(bounds_, level.resolution, position);
        out.clamped = out.clamped || t.clamped;
        for (int dz = 0; dz < 2; dz++)
            for (int dy = 0; dy < 2; dy++)
                for (int dx = 0; dx < 2; dx++) {
                    double w = (dx ? t.tx : 1 - t.tx) * (dy ? t.ty : 1 - t.ty) *
                               (dz ? t.tz : 1 - t.tz);
                    size_t base = parameter_index(int(li), t.x0 + dx, t.y0 + dy, t.z0 + dz, 0);
                    out.taps.push_back({base, w});
                    for (int c = 0; c < kMaterialChannels; c++) raw[c] += w * parameters_[base + c];
                }
    }
    for (int c = 0; c < kMaterialChannels; c++) out.activation_slope[c] = logistic_derivative(raw[c]);
    out.sample = MaterialSample({logistic(raw[0]), logistic(raw[1]), logistic(raw[2])},
                                logistic(raw[3]), logistic(raw[4]));
    return out;
}

double MaterialField::smoothness_loss(const std::vector<Vec3>& points, double sigma_perturb,
                                      Rng& rng) const {
    if (points.empty()) return 0;
    double total = 0;
    for (const Vec3& p : points) {
        Vec3 delta{rng.next_normal() * sigma_perturb, rng.next_normal() * sigma_perturb,
                   rng.next_normal() * sigma_perturb};
        MaterialSample a = query(p);
        MaterialSample b = query(p + delta);
        total += std::abs(a.albedo.x - b.albedo.x) + std::abs(a.albedo.y - b.albedo.y) +
                 std::abs(a.albedo.z - b.albedo.z) + std::abs(a.roughness - b.roughness) +
                 std::abs(a.metalness - b.metalness);
    }
    return total / double(points.size());
}

double MaterialField::smoothness_loss_grad(const std::vector<Vec3>& points, double sigma_perturb,
                                           Rng& rng, std::vector<double>& grad,
                                           double weight) const {
    if (points.empty()) return 0;
    const double inv_n = 1.0 / double(points.size());
    const double scale = inv_n * weight;
    double total = 0;
    for (const Vec3& p : points) {
        Vec3 delta{rng.next_normal() * sigma_perturb, rng.next_normal() * sigma_perturb,
                   rng.next_normal() * sigma_perturb};
        QueryGrad a = query_with_gradient(p);
        QueryGrad b = query_with_gradient(p + delta);
        const double av[kMaterialChannels] = {a.sample.albedo.x, a.sample.albedo.y,
                                              a.sample.albedo.z, a.sample.roughness,
                                              a.sample.metalness};
        const double bv[kMaterialChannels] = {b.sample.albedo.x, b.sample.albedo.y,
                                              b.sample.albedo.z, b.sample.roughness,
                                              b.sample.metalness};
        for (int c = 0; c < kMaterialChannels; c++) {
            double diff = av[c] - bv[c];
            total += std::abs(diff);
            double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
            for (const auto& tap : a.taps)
                grad[tap.node_base + c] += scale * sign * tap.weight * a.activation_slope[c];
            for (const auto& tap : b.taps)
                grad[tap.node_base + c] -= scale * sign * tap.weight * b.activation_slope[c];
        }
    }
    return total * inv_n;
}

void MaterialField::save(const std::string& path) const {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : levels_) levels.push_back(l.resolution);
    nlohmann::json header{
        {"kind", "material_field"},
        {"levels", levels},
        {"bounds_lo", {bounds_.lo.x, bounds_.lo.y, bounds_.lo.z}},
        {"bounds_hi", {bounds_.hi.x, bounds_.hi.y, bounds_.hi.z}},
        {"channels", kMaterialChannels},
        {"dtype", "float64"},
    };
    save_blob(path, header, parameters_.data(), parameters_.size() * sizeof(double));
}

MaterialField MaterialField::load(const std::string& path) {
    std::vector<unsigned char> payload;
    nlohmann::json header = load_blob(path, payload);
    if (header.value("kind", "") != "material_field")
        throw std::runtime_error("not a material_field blob: " + path);
    Box3 b;
    auto lo = header.at("bounds_lo"), hi = header.at("bounds_hi");
    b.lo = {lo[0], lo[1], lo[2]};
    b.hi = {hi[0], hi[1], hi[2]};
    std::vector<int> levels;
    for (const auto& l : header.at("levels")) levels.push_back(l);
    MaterialField field(b, levels);
    if (payload.size() != field.parameters_.size() * sizeof(double))
        throw std::runtime_error("material_field payload size mismatch: " + path);
    std::memcpy(field.parameters_.data(), payload.data(), payload.size());
    return field;
}

}  // namespace geosplat
