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

#include "geosplat/gaussians.hpp"

#include <cstring>
#include <stdexcept>

#include "geosplat/blob_io.hpp"

namespace geosplat {

void GaussianSet::validate() const {
    if (payload == PayloadKind::color && colors.size() != points.size())
        throw std::invalid_argument("gaussian set: color payload count mismatch");
    if (payload == PayloadKind::attributes && materials.size() != points.size())
        throw std::invalid_argument("gaussian set: attribute payload count mismatch");
    for (const auto& c : colors)
        if (!is_finite(c) || c.x < 0 || c.y < 0 || c.z < 0)
            throw std::invalid_argument("gaussian set: colors must be finite and >= 0");
    for (const auto& p : points) {
        if (std::abs(length(p.normal) - 1.0) > 1e-6)
            throw std::invalid_argument("gaussian set: normal not unit length");
        if (orthonormality_error(p.rotation) > 1e-5)
            throw std::invalid_argument("gaussian set: rotation not orthonormal");
        if (p.scale.x < 0 || p.scale.y < 0 || p.scale.z < 0)
            throw std::invalid_argument("gaussian set: negative scale");
    }
}

namespace {
constexpr int kRecordDoubles = 14;  // mu(3) scale(3) quat(4) normal(3) opacity(1)
}

void save_gaussians(const GaussianSet& set, const std::string& path) {
    std::vector<double> table;
    table.reserve(set.points.size() * kRecordDoubles);
    for (const auto& g : set.points) {
        auto q = quaternion_from_matrix(g.rotation);
        const double rec[kRecordDoubles] = {
            g.position.x, g.position.y, g.position.z,
            g.scale.x, g.scale.y, g.scale.z,
            q[0], q[1], q[2], q[3],
            g.normal.x, g.normal.y, g.normal.z,
            g.opacity,
        };
        table.insert(table.end(), rec, rec + kRecordDoubles);
    }
    nlohmann::json header{
        {"kind", "gaussian_table"},
        {"count", set.points.size()},
        {"record",
         {"position.x", "position.y", "position.z", "scale.x", "scale.y", "scale.z", "quat.w",
          "quat.x", "quat.y", "quat.z", "normal.x", "normal.y", "normal.z", "opacity"}},
        {"dtype", "float64"},
    };
    save_blob(path, header, table.data(), table.size() * sizeof(double));
}

GaussianSet load_gaussians(const std::string& path) {
    std::vector<unsigned char> payload;
    nlohmann::json header = load_blob(path, payload);
    if (header.value("kind", "") != "gaussian_table")
        throw std::runtime_error("not a gaussian_table blob: " + path);
    size_t count = header.at("count");
    if (payload.size() != count * kRecordDoubles * sizeof(double))
        throw std::runtime_error("gaussian_table payload size mismatch: " + path);
    GaussianSet set;
    set.points.resize(count);
    const double* rec = reinterpret_cast<const double*>(payload.data());
    for (size_t i = 0; i < count; i++, rec += kRecordDoubles) {
        GaussianPoint& g = set.points[i];
        g.position = {rec[0], rec[1], rec[2]};
        g.scale = {rec[3], rec[4], rec[5]};
        g.rotation = matrix_from_quaternion({rec[6], rec[7], rec[8], rec[9]});
        g.normal = {rec[10], rec[11], rec[12]};
        g.opacity = rec[13];
        g.source_face = uint32_t(i);
    }
    return set;
}

}  // namespace geosplat
