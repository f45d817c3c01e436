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
#include <functional>
#include <string>
#include <vector>

#include "geosplat/math.hpp"
#include "geosplat/mesh.hpp"

namespace geosplat {

/// Dense scalar field sampled on a regular grid over an axis-aligned box.
struct ScalarGrid {
    int nx = 0, ny = 0, nz = 0;
    Box3 bounds;
    std::vector<double> values;  // x-fastest: index = (z*ny + y)*nx + x

    ScalarGrid() = default;
    ScalarGrid(int nx_, int ny_, int nz_, const Box3& b)
        : nx(nx_), ny(ny_), nz(nz_), bounds(b), values(size_t(nx_) * ny_ * nz_, 0.0) {}

    size_t index(int x, int y, int z) const { return (size_t(z) * ny + y) * nx + x; }
    double& at(int x, int y, int z) { return values[index(x, y, z)]; }
    double at(int x, int y, int z) const { return values[index(x, y, z)]; }

    Vec3 position(int x, int y, int z) const {
        Vec3 e = bounds.extent();
        return {bounds.lo.x + e.x * x / (nx - 1), bounds.lo.y + e.y * y / (ny - 1),
                bounds.lo.z + e.z * z / (nz - 1)};
    }

    /// Fills values by evaluating fn at every node position.
    void fill(const std::function<double(const Vec3&)>& fn);

    void validate() const;
};

struct IsosurfaceResult {
    Mesh mesh;
    bool empty = false;  // set when the field minus level has uniform sign
};

/// Standard marching cubes over the 256 sign configurations. Vertices lie on
/// grid edges where linear interpolation crosses `level`; shared edge
/// vertices are welded, so sign-consistent fields produce watertight
/// surfaces. Triangles are oriented with normals pointing toward increasing
/// field values.
IsosurfaceResult extract_isosurface(const ScalarGrid& grid, double level);

/// Sign-crossing entropy over the 6-neighborhood axis edges:
/// sum over sign-differing edges (vi, vj) of
///   H(sigma(z_i), step(z_j)) + H(sigma(z_j), step(z_i))
/// where H is binary cross entropy, sigma the logistic squashing, and
/// step maps sign to {0,1} (zero counts as positive). Zero when no edge
/// changes sign.
double entropy_loss(const ScalarGrid& grid);

/// Binary block with JSON header (resolution, bounds, little-endian float64).
void save_grid(const ScalarGrid& grid, const std::string& path);
ScalarGrid load_grid(const std::string& path);

}  // namespace geosplat
