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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "geosplat/math.hpp"

namespace geosplat {

/// Indexed triangle mesh with per-vertex unit normals and cached face areas.
/// Immutable once built; treat as read-only after finalize().
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> vertex_normals;
    std::vector<std::array<uint32_t, 3>> faces;
    std::vector<double> face_areas;

    size_t vertex_count() const { return vertices.size(); }
    size_t face_count() const { return faces.size(); }

    Vec3 vertex(uint32_t i) const { return vertices[i]; }
    const std::array<uint32_t, 3>& face(size_t f) const { return faces[f]; }

    Vec3 face_normal(size_t f) const {
        const auto& tri = faces[f];
        return normalize(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
    }
    /// Unnormalized face normal; its length is twice the face area.
    Vec3 face_cross(size_t f) const {
        const auto& tri = faces[f];
        return cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
    }

    Box3 bounds() const;
    double bounding_diagonal() const { return bounds().diagonal(); }

    /// Recomputes face areas and, when vertex_normals is empty, area-weighted
    /// vertex normals. Drops zero-area faces (count reported in the returned
    /// value). Throws on out-of-range face indices or non-finite vertices.
    struct FinalizeReport {
        size_t degenerate_faces_dropped = 0;
        size_t isolated_vertices = 0;
        bool manifold = true;  // every edge shared by exactly two faces
    };
    FinalizeReport finalize(bool recompute_normals = false);
};

/// Area-weighted vertex normals: normalize(sum of faceNormal * faceArea over
/// incident faces). Isolated vertices fall back to +z; their count is
/// returned through isolated (may be null).
std::vector<Vec3> area_weighted_normals(const Mesh& mesh, size_t* isolated = nullptr);

/// Checks that every edge is shared by exactly two faces.
bool is_watertight(const Mesh& mesh);

// Procedural test geometry -------------------------------------------------

/// Regular icosahedron with vertices on the unit sphere (12 verts, 20 faces).
Mesh make_icosahedron();

/// Icosphere: icosahedron subdivided `subdivisions` times, vertices projected
/// to radius; 20*4^subdivisions faces. Normals are exact (radial).
Mesh make_icosphere(int subdivisions, double radius = 1.0, const Vec3& center = {0, 0, 0});

/// Rectangular plane in the xz plane at height y, normals +y, split in a
/// grid of (2 * nx * nz) triangles spanning [-sx/2, sx/2] x [-sz/2, sz/2].
Mesh make_plane(double sx, double sz, double y = 0.0, int nx = 1, int nz = 1);

/// Axis-aligned closed box (12 faces, flat shading via per-corner normals of
/// averaged adjacent faces; adequate as an occluder / enclosure).
Mesh make_box(const Vec3& lo, const Vec3& hi);

/// Concatenates two meshes (vertex indices of b are offset).
Mesh merge_meshes(const Mesh& a, const Mesh& b);

}  // namespace geosplat
