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

#include "geosplat/bvh.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace geosplat {

bool intersect_triangle(const Ray& ray, const Vec3& p0, const Vec3& p1, const Vec3& p2, double& t,
                        double& u, double& v) {
    const Vec3 e1 = p1 - p0;
    const Vec3 e2 = p2 - p0;
    const Vec3 pvec = cross(ray.direction, e2);
    const double det = dot(e1, pvec);
    if (std::abs(det) < 1e-14) return false;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = ray.origin - p0;
    u = dot(tvec, pvec) * inv_det;
    if (u < 0 || u > 1) return false;
    const Vec3 qvec = cross(tvec, e1);
    v = dot(ray.direction, qvec) * inv_det;
    if (v < 0 || u + v > 1) return false;
    t = dot(e2, qvec) * inv_det;
    return t > ray.t_min && t <= ray.t_max;
}

namespace {

bool intersect_box(const Box3& box, const Ray& ray, const Vec3& inv_dir, double t_max) {
    double t0 = ray.t_min, t1 = t_max;
    for (int a = 0; a < 3; a++) {
        double near = (box.lo[a] - ray.origin[a]) * inv_dir[a];
        double far = (box.hi[a] - ray.origin[a]) * inv_dir[a];
        if (near > far) std::swap(near, far);
        t0 = std::max(t0, near);
        t1 = std::min(t1, far);
        if (t0 > t1) return false;
    }
    return true;
}

}  // namespace

void Bvh::build(Mesh mesh) {
    if (mesh.face_count() == 0) throw std::invalid_argument("bvh: empty mesh");
    mesh_ = std::move(mesh);
    diagonal_ = mesh_.bounding_diagonal();
    order_.resize(mesh_.face_count());
    std::iota(order_.begin(), order_.end(), 0u);
    centroids_.resize(mesh_.face_count());
    for (size_t f = 0; f < mesh_.face_count(); f++) {
        const auto& tri = mesh_.faces[f];
        centroids_[f] =
            (mesh_.vertices[tri[0]] + mesh_.vertices[tri[1]] + mesh_.vertices[tri[2]]) / 3.0;
    }
    nodes_.clear();
    nodes_.reserve(mesh_.face_count() * 2);
    depth_ = 0;
    build_node(0, uint32_t(mesh_.face_count()), 1);
    centroids_.clear();
    centroids_.shrink_to_fit();
}

uint32_t Bvh::build_node(uint32_t begin, uint32_t end, int depth) {
    depth_ = std::max(depth_, depth);
    uint32_t index = uint32_t(nodes_.size());
    nodes_.emplace_back();

    Box3 box;
    for (uint32_t i = begin; i < end; i++) {
        const auto& tri = mesh_.faces[order_[i]];
        for (int k = 0; k < 3; k++) box.expand(mesh_.vertices[tri[k]]);
    }

    const uint32_t count = end - begin;
    if (count <= 4 || depth >= 64) {
        Node& node = nodes_[index];
        node.box = box;
        node.first = begin;
        node.count = count;
        return index;
    }

    Box3 cbox;
    for (uint32_t i = begin; i < end; i++) cbox.expand(centroids_[order_[i]]);
    Vec3 extent = cbox.extent();
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    uint32_t mid = begin + count / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](uint32_t a, uint32_t b) {
                         double ca = centroids_[a][axis], cb = centroids_[b][axis];
                         return ca < cb || (ca == cb && a < b);  // total order: deterministic
                     });

    uint32_t left = build_node(begin, mid, depth + 1);
    uint32_t right = build_node(mid, end, depth + 1);
    Node& node = nodes_[index];
    node.box = box;
    node.left = left;
    node.right = right;
    node.count = 0;
    return index;
}

Hit Bvh::closest_hit(const Ray& ray) const {
    Hit hit;
    if (nodes_.empty()) return hit;
    const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    double t_best = ray.t_max;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!intersect_box(node.box, ray, inv_dir, t_best)) continue;
        if (node.count > 0) {
            for (uint32_t i = node.first; i < node.first + node.count; i++) {
                uint32_t f = order_[i];
                const auto& tri = mesh_.faces[f];
                double t, u, v;
                Ray limited = ray;
                limited.t_max = t_best;
                if (intersect_triangle(limited, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                       mesh_.vertices[tri[2]], t, u, v)) {
                    // break exact-t ties on face index for determinism
                    if (t < t_best || (t == t_best && f < hit.face)) {
                        t_best = t;
                        hit.t = t;
                        hit.face = f;
                        hit.bary_u = u;
                        hit.bary_v = v;
                    }
                }
            }
        } else {
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }
    return hit;
}

bool Bvh::any_hit(const Ray& ray) const {
    if (nodes_.empty()) return false;
    const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!intersect_box(node.box, ray, inv_dir, ray.t_max)) continue;
        if (node.count > 0) {
            for (uint32_t i = node.first; i < node.first + node.count; i++) {
                const auto& tri = mesh_.faces[order_[i]];
                double t, u, v;
                if (intersect_triangle(ray, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                       mesh_.vertices[tri[2]], t, u, v))
                    return true;
            }
        } else {
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }
    return false;
}

}  // namespace geosplat
