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
#include <vector>

#include "geosplat/gaussians.hpp"
#include "geosplat/mesh.hpp"

namespace geosplat {

/// Constants of the triangle-to-Gaussian sampling pattern. The six sampling
/// locations come from two symmetric barycentric triples built on u (inner)
/// and v (outer); alpha/beta scale the in-plane extents and delta is the
/// thickness along the normal.
struct AdapterConstants {
    double u = 0.07;
    double v = 0.22;
    double alpha_inner = 0.80;
    double alpha_outer = 2.08;
    double beta_inner = 15.0;
    double beta_outer = 13.0;
    double delta = 4.5e-5;
    double vertex_k = 1.0;  // vertex-mode area factor (stage warm-up)

    void validate() const;  // 0 < u < v < 1/2; alpha, beta, delta > 0
};

enum class AdapterMode { face, vertex };

/// The six barycentric sample triples b1..b6 for given (u, v).
std::array<Vec3, 6> adapter_barycentric_points(double u, double v);
/// The six midpoints m_jk = (b_j + b_k) / 2 in pattern order
/// (1,2), (2,3), (3,1), (4,5), (5,6), (6,4).
std::array<Vec3, 6> adapter_midpoints(double u, double v);

/// Samples the six Gaussian points of one triangle. For midpoint m_jk:
///   mu  = m_jk . P            n   = normalize(m_jk . N)
///   S_x = alpha_jk |b_k.P - mu|   S_y = Area / (beta_jk |b_k.P - mu|)
///   S_z = delta
///   R_x = direction of (b_k.P - mu), re-orthogonalized against n
///   R_y = n x R_x                R_z = n
/// Returns false (face skipped) when a tangent direction degenerates.
bool sample_face(const Mesh& mesh, uint32_t face, const AdapterConstants& c,
                 std::array<GaussianPoint, 6>& out);

/// Vertex-mode sample: an isotropic disk over the incident-face star.
///   mu = vertex, n = vertex normal,
///   S_x = S_y = sqrt(k/3 * sum of incident face areas), S_z = delta,
///   R_x = normalize((0,0,1) x n)  (falls back to (1,0,0) x n when n || z).
/// Returns false for isolated vertices.
bool sample_vertex(const Mesh& mesh, uint32_t vertex, const std::vector<double>& star_area,
                   const AdapterConstants& c, GaussianPoint& out);

/// Runs the adapter over the whole mesh. Face mode emits 6 points per face in
/// face-major order; vertex mode emits at most one point per vertex. Output
/// is deterministic (same mesh and constants give bit-identical points).
GaussianSet adapt(const Mesh& mesh, AdapterMode mode, const AdapterConstants& c);

/// Analytic Jacobians of one sampled point with respect to the source
/// triangle, for verifying that the sampling formulas are differentiable.
/// Layout: d_position[k][i][j] = d mu_i / d p_{k,j} for triangle vertex k;
/// scales likewise; d_normal is taken with respect to the vertex *normals*
/// (positions do not enter the normal formula).
struct FaceSampleJacobian {
    std::array<Mat3, 3> d_position;     // d mu / d p_k
    std::array<Vec3, 3> d_scale_x;      // d S_x / d p_k
    std::array<Vec3, 3> d_scale_y;      // d S_y / d p_k
    std::array<Mat3, 3> d_normal;       // d n / d n_k (vertex normals)
};
bool sample_face_jacobian(const Mesh& mesh, uint32_t face, const AdapterConstants& c,
                          int sample_index, FaceSampleJacobian& out);

}  // namespace geosplat
