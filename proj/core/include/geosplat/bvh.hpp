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
#include <vector>

#include "geosplat/math.hpp"
#include "geosplat/mesh.hpp"

namespace geosplat {

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit
    double t_min = 0;
    double t_max = kInf;
};

struct Hit {
    double t = kInf;
    uint32_t face = UINT32_MAX;
    double bary_u = 0, bary_v = 0;  // weights of face vertices 1 and 2

    bool valid() const { return face != UINT32_MAX; }
};

/// Moller-Trumbore ray/triangle intersection; t limited to (ray.t_min, ray.t_max].
bool intersect_triangle(const Ray& ray, const Vec3& p0, const Vec3& p1, const Vec3& p2, double& t,
                        double& u, double& v);

/// Median-split BVH (longest axis, leaf size <= 4). Construction is
/// deterministic; queries are pure and safe to run concurrently. The tree
/// keeps its own copy of the mesh, so a Bvh is self-contained and movable.
class Bvh {
public:
    Bvh() = default;
    explicit Bvh(Mesh mesh) { build(std::move(mesh)); }
    void build(Mesh mesh);

    bool valid() const { return !nodes_.empty(); }
    const Mesh& mesh() const { return mesh_; }
    double scene_diagonal() const { return diagonal_; }

    Hit closest_hit(const Ray& ray) const;
    bool any_hit(const Ray& ray) const;

    struct Node {
        Box3 box;
        uint32_t left = 0;    // internal: left child (right = left + skip info below)
        uint32_t right = 0;   // internal: right child; leaves: unused
        uint32_t first = 0;   // leaves: first triangle in order_
        uint32_t count = 0;   // leaves: triangle count; 0 marks an internal node
    };
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<uint32_t>& triangle_order() const { return order_; }
    int depth() const { return depth_; }

private:
    uint32_t build_node(uint32_t begin, uint32_t end, int depth);

    Mesh mesh_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> order_;
    std::vector<Vec3> centroids_;
    double diagonal_ = 0;
    int depth_ = 0;
};

}  // namespace geosplat
