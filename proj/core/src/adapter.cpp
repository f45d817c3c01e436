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

#include "geosplat/adapter.hpp"

#include <stdexcept>

namespace geosplat {

namespace {

// pattern pairs (j,k): the tangent axis of sample m_jk points toward b_k
constexpr std::array<std::array<int, 2>, 6> kPairs = {{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}};

Vec3 bary_mix(const Vec3& q, const Vec3& a0, const Vec3& a1, const Vec3& a2) {
    return a0 * q.x + a1 * q.y + a2 * q.z;
}

}  // namespace

void AdapterConstants::validate() const {
    if (!(0 < u && u < v && v < 0.5))
        throw std::invalid_argument("adapter constants: need 0 < u < v < 1/2");
    if (!(alpha_inner > 0 && alpha_outer > 0 && beta_inner > 0 && beta_outer > 0 && delta > 0))
        throw std::invalid_argument("adapter constants: alpha, beta, delta must be > 0");
    if (!(vertex_k > 0)) throw std::invalid_argument("adapter constants: vertex_k must be > 0");
}

std::array<Vec3, 6> adapter_barycentric_points(double u, double v) {
    return {{
        {u, u, 1 - 2 * u},
        {u, 1 - 2 * u, u},
        {1 - 2 * u, u, u},
        {v, v, 1 - 2 * v},
        {v, 1 - 2 * v, v},
        {1 - 2 * v, v, v},
    }};
}

std::array<Vec3, 6> adapter_midpoints(double u, double v) {
    auto b = adapter_barycentric_points(u, v);
    std::array<Vec3, 6> m;
    for (int s = 0; s < 6; s++) m[s] = (b[kPairs[s][0]] + b[kPairs[s][1]]) * 0.5;
    return m;
}

bool sample_face(const Mesh& mesh, uint32_t face, const AdapterConstants& c,
                 std::array<GaussianPoint, 6>& out) {
    const auto& tri = mesh.faces[face];
    const Vec3 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
    const Vec3 n0 = mesh.vertex_normals[tri[0]], n1 = mesh.vertex_normals[tri[1]],
               n2 = mesh.vertex_normals[tri[2]];
    const double area = mesh.face_areas.empty() ? 0.5 * length(cross(p1 - p0, p2 - p0))
                                                : mesh.face_areas[face];
    if (!(area > 0)) return false;

    const auto b = adapter_barycentric_points(c.u, c.v);
    const auto m = adapter_midpoints(c.u, c.v);
    const double scene_scale = std::sqrt(area);

    for (int s = 0; s < 6; s++) {
        const bool inner = s < 3;
        const double alpha = inner ? c.alpha_inner : c.alpha_outer;
        const double beta = inner ? c.beta_inner : c.beta_outer;

        GaussianPoint& g = out[s];
        g.position = bary_mix(m[s], p0, p1, p2);
        Vec3 n_raw = bary_mix(m[s], n0, n1, n2);
        double n_len = length(n_raw);
        if (n_len < 1e-12) return false;
        g.normal = n_raw / n_len;

        Vec3 tangent = bary_mix(b[kPairs[s][1]], p0, p1, p2) - g.position;
        double t_len = length(tangent);
        if (t_len < 1e-12 * scene_scale) return false;

        g.scale = {alpha * t_len, area / (beta * t_len), c.delta};

        // R_y = n x R_x is orthonormal only if R_x is perpendicular to n,
        // which interpolated normals do not guarantee; project first.
        Vec3 rx = tangent - g.normal * dot(g.normal, tangent);
        double rx_len = length(rx);
        if (rx_len < 1e-12 * scene_scale) return false;
        rx /= rx_len;
        g.rotation = Mat3::from_columns(rx, cross(g.normal, rx), g.normal);
        g.opacity = 1.0;
        g.source_face = face;
        g.barycentric = m[s];
    }
    return true;
}

bool sample_vertex(const Mesh& mesh, uint32_t vertex, const std::vector<double>& star_area,
                   const AdapterConstants& c, GaussianPoint& out) {
    if (star_area[vertex] <= 0) return false;
    out.position = mesh.vertices[vertex];
    out.normal = mesh.vertex_normals[vertex];
    double s = std::sqrt(c.vertex_k / 3.0 * star_area[vertex]);
    out.scale = {s, s, c.delta};

    Vec3 rx = cross(Vec3{0, 0, 1}, out.normal);
    if (length(rx) < 1e-8) rx = cross(Vec3{1, 0, 0}, out.normal);
    rx = normalize(rx);
    out.rotation = Mat3::from_columns(rx, cross(out.normal, rx), out.normal);
    out.opacity = 1.0;
    out.source_face = vertex;
    out.barycentric = {0, 0, 0};
    return true;
}

GaussianSet adapt(const Mesh& mesh, AdapterMode mode, const AdapterConstants& c) {
    c.validate();
    GaussianSet set;
    if (mode == AdapterMode::face) {
        set.points.reserve(mesh.face_count() * 6);
        std::array<GaussianPoint, 6> six;
        for (uint32_t f = 0; f < mesh.face_count(); f++) {
            if (!sample_face(mesh, f, c, six)) continue;
            for (const auto& g : six) set.points.push_back(g);
        }
    } else {
        std::vector<double> star(mesh.vertex_count(), 0.0);
        for (size_t f = 0; f < mesh.face_count(); f++)
            for (uint32_t vi : mesh.faces[f]) star[vi] += mesh.face_areas[f];
        set.points.reserve(mesh.vertex_count());
        GaussianPoint g;
        for (uint32_t v = 0; v < mesh.vertex_count(); v++)
            if (sample_vertex(mesh, v, star, c, g)) set.points.push_back(g);
    }
    return set;
}

bool sample_face_jacobian(const Mesh& mesh, uint32_t face, const AdapterConstants& c,
                          int sample_index, FaceSampleJacobian& out) {
    const auto& tri = mesh.faces[face];
    const Vec3 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
    const Vec3 n0 = mesh.vertex_normals[tri[0]], n1 = mesh.vertex_normals[tri[1]],
               n2 = mesh.vertex_normals[tri[2]];

    const auto b = adapter_barycentric_points(c.u, c.v);
    const auto m = adapter_midpoints(c.u, c.v);
    const int s = sample_index;
    const bool inner = s < 3;
    const double alpha = inner ? c.alpha_inner : c.alpha_outer;
    const double beta = inner ? c.beta_inner : c.beta_outer;

    Vec3 mu = bary_mix(m[s], p0, p1, p2);
    Vec3 tangent = bary_mix(b[kPairs[s][1]], p0, p1, p2) - mu;
    double t_len = length(tangent);
    if (t_len < 1e-15) return false;
    Vec3 t_hat = tangent / t_len;

    Vec3 face_c = cross(p1 - p0, p2 - p0);
    double area = 0.5 * length(face_c);
    if (!(area > 0)) return false;
    Vec3 face_n = face_c / (2.0 * area);

    // weights of each triangle vertex in mu and in the tangent difference
    Vec3 w_mu = m[s];
    Vec3 w_t = b[kPairs[s][1]] - m[s];

    // area gradients: dA/dp0 = 0.5 (p1 - p2) x n_face, cyclic
    std::array<Vec3, 3> d_area = {
        cross(p1 - p2, face_n) * 0.5,
        cross(p2 - p0, face_n) * 0.5,
        cross(p0 - p1, face_n) * 0.5,
    };

    for (int k = 0; k < 3; k++) {
        // mu is linear: d mu_i / d p_{k,j} = w_mu[k] * delta_ij
        out.d_position[k] = Mat3::diagonal({w_mu[k], w_mu[k], w_mu[k]});
        // d |t| / d p_k = w_t[k] * t_hat
        Vec3 d_len = t_hat * w_t[k];
        out.d_scale_x[k] = d_len * alpha;
        // S_y = A / (beta |t|)
        out.d_scale_y[k] = d_area[k] / (beta * t_len) - d_len * (area / (beta * t_len * t_len));
    }

    // n = normalize(m . N): d n / d n_k = m_k (I - n n^T) / |n_raw|
    Vec3 n_raw = bary_mix(m[s], n0, n1, n2);
    double n_len = length(n_raw);
    if (n_len < 1e-15) return false;
    Vec3 n_hat = n_raw / n_len;
    Mat3 proj;
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) proj.m[i][j] = ((i == j ? 1.0 : 0.0) - n_hat[i] * n_hat[j]) / n_len;
    for (int k = 0; k < 3; k++) {
        out.d_normal[k] = proj;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) out.d_normal[k].m[i][j] *= m[s][k];
    }
    return true;
}

}  // namespace geosplat
