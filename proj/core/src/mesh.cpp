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

#include "geosplat/mesh.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace geosplat {

Box3 Mesh::bounds() const {
    Box3 b;
    for (const auto& v : vertices) b.expand(v);
    return b;
}

std::vector<Vec3> area_weighted_normals(const Mesh& mesh, size_t* isolated) {
    std::vector<Vec3> accum(mesh.vertices.size(), Vec3{0, 0, 0});
    for (size_t f = 0; f < mesh.faces.size(); f++) {
        // face_cross = faceNormal * 2*area, so summing it weights by area
        Vec3 weighted = mesh.face_cross(f);
        for (uint32_t vi : mesh.faces[f]) accum[vi] += weighted;
    }
    size_t lonely = 0;
    for (auto& n : accum) {
        double l = length(n);
        if (l > 0) {
            n /= l;
        } else {
            n = {0, 0, 1};
            lonely++;
        }
    }
    if (isolated) *isolated = lonely;
    return accum;
}

bool is_watertight(const Mesh& mesh) {
    std::map<std::pair<uint32_t, uint32_t>, int> edge_use;
    for (const auto& tri : mesh.faces) {
        for (int e = 0; e < 3; e++) {
            uint32_t a = tri[e], b = tri[(e + 1) % 3];
            edge_use[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [edge, count] : edge_use)
        if (count != 2) return false;
    return true;
}

Mesh::FinalizeReport Mesh::finalize(bool recompute_normals) {
    FinalizeReport report;
    for (const auto& v : vertices)
        if (!is_finite(v)) throw std::invalid_argument("mesh: non-finite vertex position");
    std::vector<std::array<uint32_t, 3>> kept;
    kept.reserve(faces.size());
    face_areas.clear();
    for (const auto& tri : faces) {
        for (uint32_t vi : tri)
            if (vi >= vertices.size()) throw std::invalid_argument("mesh: face index out of range");
        Vec3 c = cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
        double area = 0.5 * length(c);
        if (area > 0) {
            kept.push_back(tri);
            face_areas.push_back(area);
        } else {
            report.degenerate_faces_dropped++;
        }
    }
    faces = std::move(kept);
    if (recompute_normals || vertex_normals.size() != vertices.size()) {
        vertex_normals = area_weighted_normals(*this, &report.isolated_vertices);
    } else {
        for (auto& n : vertex_normals) {
            double l = length(n);
            if (l > 0) n /= l;
            else { n = {0, 0, 1}; report.isolated_vertices++; }
        }
    }
    report.manifold = is_watertight(*this);
    return report;
}

Mesh make_icosahedron() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    Mesh m;
    m.vertices = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& v : m.vertices) v = normalize(v);
    m.faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    m.vertex_normals = m.vertices;  // radial
    m.finalize();
    return m;
}

Mesh make_icosphere(int subdivisions, double radius, const Vec3& center) {
    Mesh m = make_icosahedron();
    for (int s = 0; s < subdivisions; s++) {
        std::map<std::pair<uint32_t, uint32_t>, uint32_t> midpoint;
        auto mid = [&](uint32_t a, uint32_t b) -> uint32_t {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            uint32_t idx = uint32_t(m.vertices.size());
            m.vertices.push_back(normalize((m.vertices[a] + m.vertices[b]) * 0.5));
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<uint32_t, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& tri : m.faces) {
            uint32_t ab = mid(tri[0], tri[1]);
            uint32_t bc = mid(tri[1], tri[2]);
            uint32_t ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    m.vertex_normals.resize(m.vertices.size());
    for (size_t i = 0; i < m.vertices.size(); i++) {
        m.vertex_normals[i] = m.vertices[i];
        m.vertices[i] = center + m.vertices[i] * radius;
    }
    m.finalize();
    return m;
}

Mesh make_plane(double sx, double sz, double y, int nx, int nz) {
    Mesh m;
    for (int iz = 0; iz <= nz; iz++)
        for (int ix = 0; ix <= nx; ix++) {
            m.vertices.push_back({-sx / 2 + sx * ix / nx, y, -sz / 2 + sz * iz / nz});
            m.vertex_normals.push_back({0, 1, 0});
        }
    auto vid = [&](int ix, int iz) { return uint32_t(iz * (nx + 1) + ix); };
    for (int iz = 0; iz < nz; iz++)
        for (int ix = 0; ix < nx; ix++) {
            // counter-clockwise seen from +y
            m.faces.push_back({vid(ix, iz), vid(ix, iz + 1), vid(ix + 1, iz)});
            m.faces.push_back({vid(ix + 1, iz), vid(ix, iz + 1), vid(ix + 1, iz + 1)});
        }
    m.finalize();
    return m;
}

Mesh make_box(const Vec3& lo, const Vec3& hi) {
    Mesh m;
    for (int i = 0; i < 8; i++) {
        m.vertices.push_back({i & 1 ? hi.x : lo.x, i & 2 ? hi.y : lo.y, i & 4 ? hi.z : lo.z});
    }
    // outward-facing quads split into triangles
    const std::array<std::array<uint32_t, 4>, 6> quads = {{
        {0, 2, 3, 1},  // -z
        {4, 5, 7, 6},  // +z
        {0, 1, 5, 4},  // -y
        {2, 6, 7, 3},  // +y
        {0, 4, 6, 2},  // -x
        {1, 3, 7, 5},  // +x
    }};
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    m.finalize(true);
    return m;
}

Mesh merge_meshes(const Mesh& a, const Mesh& b) {
    Mesh m = a;
    uint32_t offset = uint32_t(a.vertices.size());
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    m.vertex_normals.insert(m.vertex_normals.end(), b.vertex_normals.begin(),
                            b.vertex_normals.end());
    for (const auto& tri : b.faces)
        m.faces.push_back({tri[0] + offset, tri[1] + offset, tri[2] + offset});
    m.finalize();
    return m;
}

}  // namespace geosplat
