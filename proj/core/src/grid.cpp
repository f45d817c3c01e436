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

#include "geosplat/grid.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "geosplat/blob_io.hpp"

namespace geosplat {

void ScalarGrid::fill(const std::function<double(const Vec3&)>& fn) {
    for (int z = 0; z < nz; z++)
        for (int y = 0; y < ny; y++)
            for (int x = 0; x < nx; x++) at(x, y, z) = fn(position(x, y, z));
}

void ScalarGrid::validate() const {
    if (nx < 2 || ny < 2 || nz < 2)
        throw std::invalid_argument("grid: resolution must be >= 2 per axis");
    if (values.size() != size_t(nx) * ny * nz)
        throw std::invalid_argument("grid: value count does not match resolution");
    if (bounds.empty()) throw std::invalid_argument("grid: empty bounds");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("grid: non-finite value");
}

// ---------------------------------------------------------------------------
// Marching cubes case table.
//
// Cube corners 0..7 at (x,y,z) = (i&1, (i>>1)&1, (i>>2)&1); the 12 edges are
// listed below as corner pairs. The triangulation for each of the 256 sign
// configurations is derived once at startup by walking the iso-contour over
// the cube faces: every face contributes directed chords between its crossed
// edges (positive corners kept on the left, ambiguous faces resolved by
// cutting positive corners off individually, which depends only on the shared
// face signs and therefore matches between neighboring cells). Chords chain
// into closed loops that are fan-triangulated.
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // x-aligned
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // y-aligned
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // z-aligned
}};

// Faces as corner loops, counter-clockwise seen from outside the cube.
constexpr std::array<std::array<int, 4>, 6> kFaceCorners = {{
    {0, 2, 3, 1},  // z = 0
    {4, 5, 7, 6},  // z = 1
    {0, 1, 5, 4},  // y = 0
    {2, 6, 7, 3},  // y = 1
    {0, 4, 6, 2},  // x = 0
    {1, 3, 7, 5},  // x = 1
}};

int edge_between(int a, int b) {
    for (int e = 0; e < 12; e++) {
        if ((kEdgeCorners[e][0] == a && kEdgeCorners[e][1] == b) ||
            (kEdgeCorners[e][0] == b && kEdgeCorners[e][1] == a))
            return e;
    }
    return -1;
}

Vec3 corner_pos(int c) { return {double(c & 1), double((c >> 1) & 1), double((c >> 2) & 1)}; }

struct CaseTable {
    // per configuration: triangles as triples of edge indices
    std::array<std::vector<std::array<int, 3>>, 256> tris;
};

CaseTable build_case_table() {
    CaseTable table;
    for (int config = 0; config < 256; config++) {
        bool pos[8];
        for (int c = 0; c < 8; c++) pos[c] = (config >> c) & 1;

        // successor[e] = edge the directed contour continues to after e
        std::array<int, 12> successor;
        successor.fill(-1);

        for (const auto& corners : kFaceCorners) {
            // crossings in boundary order; type: true when + -> - (chord start)
            struct Crossing {
                int edge;
                bool is_start;
            };
            std::array<Crossing, 4> cr;
            int n = 0;
            for (int i = 0; i < 4; i++) {
                int a = corners[i], b = corners[(i + 1) % 4];
                if (pos[a] != pos[b]) cr[n++] = {edge_between(a, b), pos[a]};
            }
            // pair every start with the preceding end in boundary order
            for (int i = 0; i < n; i++) {
                if (!cr[i].is_start) continue;
                for (int k = 1; k <= n; k++) {
                    const Crossing& prev = cr[(i - k + n) % n];
                    if (!prev.is_start) {
                        successor[cr[i].edge] = prev.edge;
                        break;
                    }
                }
            }
        }

        // chase loops
        std::array<bool, 12> used;
        used.fill(false);
        for (int start = 0; start < 12; start++) {
            if (successor[start] < 0 || used[start]) continue;
            std::vector<int> loop;
            int e = start;
            bool closed = false;
            for (;;) {
                loop.push_back(e);
                used[e] = true;
                e = successor[e];
                if (e == start) { closed = true; break; }
                if (e < 0 || used[e]) break;
            }
            if (!closed || loop.size() < 3) continue;
            for (size_t i = 1; i + 1 < loop.size(); i++)
                table.tris[config].push_back({loop[0], int(loop[i]), int(loop[i + 1])});
        }
    }

    // Fix the global winding so triangle normals point toward positive
    // corners (toward increasing field values): probe the one-positive-corner
    // configuration.
    {
        const auto& tris = table.tris[1];  // only corner 0 positive
        Vec3 n{0, 0, 0};
        for (const auto& t : tris) {
            auto mid = [](int e) {
                return (corner_pos(kEdgeCorners[e][0]) + corner_pos(kEdgeCorners[e][1])) * 0.5;
            };
            n += cross(mid(t[1]) - mid(t[0]), mid(t[2]) - mid(t[0]));
        }
        if (dot(n, corner_pos(0) - Vec3{0.5, 0.5, 0.5}) < 0) {
            for (auto& per_config : table.tris)
                for (auto& t : per_config) std::swap(t[1], t[2]);
        }
    }
    return table;
}

const CaseTable& case_table() {
    static const CaseTable table = build_case_table();
    return table;
}

}  // namespace

IsosurfaceResult extract_isosurface(const ScalarGrid& grid, double level) {
    grid.validate();
    IsosurfaceResult result;
    const CaseTable& table = case_table();

    // sign with zero counted positive
    auto positive = [&](int x, int y, int z) { return grid.at(x, y, z) - level >= 0.0; };

    // global edge key: node index * 3 + axis
    auto edge_key = [&](int x, int y, int z, int axis) -> uint64_t {
        return (uint64_t(grid.index(x, y, z)) * 3) + uint64_t(axis);
    };
    std::unordered_map<uint64_t, uint32_t> edge_vertex;

    Mesh& mesh = result.mesh;
    bool any_positive = false, any_negative = false;

    for (int z = 0; z < grid.nz - 1; z++) {
        for (int y = 0; y < grid.ny - 1; y++) {
            for (int x = 0; x < grid.nx - 1; x++) {
                int config = 0;
                for (int c = 0; c < 8; c++) {
                    bool p = positive(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
                    any_positive |= p;
                    any_negative |= !p;
                    if (p) config |= 1 << c;
                }
                const auto& tris = table.tris[config];
                if (tris.empty()) continue;

                auto vertex_on_edge = [&](int e) -> uint32_t {
                    int ca = kEdgeCorners[e][0], cb = kEdgeCorners[e][1];
                    int ax = x + (ca & 1), ay = y + ((ca >> 1) & 1), az = z + ((ca >> 2) & 1);
                    int bx = x + (cb & 1), by = y + ((cb >> 1) & 1), bz = z + ((cb >> 2) & 1);
                    int axis = (ax != bx) ? 0 : (ay != by) ? 1 : 2;
                    uint64_t key = edge_key(ax, ay, az, axis);
                    auto it = edge_vertex.find(key);
                    if (it != edge_vertex.end()) return it->second;
                    double va = grid.at(ax, ay, az) - level;
                    double vb = grid.at(bx, by, bz) - level;
                    double t = va / (va - vb);  // signs differ, so va != vb
                    t = std::clamp(t, 0.0, 1.0);
                    Vec3 p = lerp(grid.position(ax, ay, az), grid.position(bx, by, bz), t);
                    uint32_t idx = uint32_t(mesh.vertices.size());
                    mesh.vertices.push_back(p);
                    edge_vertex.emplace(key, idx);
                    return idx;
                };
                for (const auto& t : tris) {
                    uint32_t a = vertex_on_edge(t[0]);
                    uint32_t b = vertex_on_edge(t[1]);
                    uint32_t c = vertex_on_edge(t[2]);
                    if (a != b && b != c && a != c) mesh.faces.push_back({a, b, c});
                }
            }
        }
    }

    // scan corners not covered above (all-positive/negative detection on the
    // full grid, not just interior cells)
    if (!any_positive || !any_negative) {
        for (double v : grid.values) {
            if (v - level >= 0) any_positive = true;
            else any_negative = true;
        }
    }

    result.empty = !(any_positive && any_negative);
    if (mesh.faces.empty()) {
        result.mesh = Mesh{};
        return result;
    }
    mesh.finalize(true);
    return result;
}

double entropy_loss(const ScalarGrid& grid) {
    grid.validate();
    auto step = [](double v) { return v >= 0 ? 1.0 : 0.0; };
    auto bce = [](double p, double y) {
        p = std::clamp(p, 1e-12, 1.0 - 1e-12);
        return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    };
    double loss = 0;
    auto accumulate = [&](double a, double b) {
        if (step(a) == step(b)) return;
        loss += bce(logistic(a), step(b)) + bce(logistic(b), step(a));
    };
    for (int z = 0; z < grid.nz; z++)
        for (int y = 0; y < grid.ny; y++)
            for (int x = 0; x < grid.nx; x++) {
                double v = grid.at(x, y, z);
                if (x + 1 < grid.nx) accumulate(v, grid.at(x + 1, y, z));
                if (y + 1 < grid.ny) accumulate(v, grid.at(x, y + 1, z));
                if (z + 1 < grid.nz) accumulate(v, grid.at(x, y, z + 1));
            }
    return loss;
}

void save_grid(const ScalarGrid& grid, const std::string& path) {
    grid.validate();
    nlohmann::json header{
        {"kind", "scalar_grid"},
        {"resolution", {grid.nx, grid.ny, grid.nz}},
        {"bounds_lo", {grid.bounds.lo.x, grid.bounds.lo.y, grid.bounds.lo.z}},
        {"bounds_hi", {grid.bounds.hi.x, grid.bounds.hi.y, grid.bounds.hi.z}},
        {"dtype", "float64"},
    };
    save_blob(path, header, grid.values.data(), grid.values.size() * sizeof(double));
}

ScalarGrid load_grid(const std::string& path) {
    std::vector<unsigned char> payload;
    nlohmann::json header = load_blob(path, payload);
    if (header.value("kind", "") != "scalar_grid")
        throw std::runtime_error("not a scalar_grid blob: " + path);
    auto res = header.at("resolution");
    Box3 b;
    auto lo = header.at("bounds_lo"), hi = header.at("bounds_hi");
    b.lo = {lo[0], lo[1], lo[2]};
    b.hi = {hi[0], hi[1], hi[2]};
    ScalarGrid grid(res[0], res[1], res[2], b);
    if (payload.size() != grid.values.size() * sizeof(double))
        throw std::runtime_error("scalar_grid payload size mismatch: " + path);
    std::memcpy(grid.values.data(), payload.data(), payload.size());
    grid.validate();
    return grid;
}

}  // namespace geosplat
