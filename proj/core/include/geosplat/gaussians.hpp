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

#include <cstdint>
#include <string>
#include <vector>

#include "geosplat/brdf.hpp"
#include "geosplat/math.hpp"

namespace geosplat {

/// One structured Gaussian point. The rotation columns (R_x, R_y, R_z) and
/// scales (s.x, s.y, s.z) define the covariance R diag(s^2) R^T; rotation
/// column R_z equals the shading normal.
struct GaussianPoint {
    Vec3 position;                  // center mu
    Vec3 scale;                     // per-axis standard deviations, >= 0
    Mat3 rotation;                  // orthonormal, columns (R_x, R_y, R_z)
    Vec3 normal;                    // unit shading normal, == rotation column z
    double opacity = 1.0;
    uint32_t source_face = 0;       // face (or vertex, in vertex mode) index
    Vec3 barycentric{0, 0, 0};      // sampling location on the source face

    Mat3 covariance() const {
        Mat3 s2 = Mat3::diagonal(scale * scale);
        return rotation * s2 * transpose(rotation);
    }
};

/// Per-point shading payload carried through the rasterizer.
enum class PayloadKind { none, color, attributes };

/// A set of Gaussian points plus an optional uniform shading payload:
/// either an RGB color per point (forward shading) or the PBR attribute
/// bundle (deferred shading; positions/normals come from the points).
struct GaussianSet {
    std::vector<GaussianPoint> points;
    PayloadKind payload = PayloadKind::none;
    std::vector<Vec3> colors;              // payload == color
    std::vector<MaterialSample> materials; // payload == attributes

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    void validate() const;
};

/// Binary table dump (per point: mu, scale, rotation quaternion wxyz, normal,
/// opacity as float64) with a JSON header describing the layout.
void save_gaussians(const GaussianSet& set, const std::string& path);
GaussianSet load_gaussians(const std::string& path);

}  // namespace geosplat
