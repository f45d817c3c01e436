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

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "geosplat/adapter.hpp"
#include "geosplat/rng.hpp"

using namespace geosplat;

namespace {

Mesh canonical_triangle() {
    Mesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 0.8660254, 0}};
    tri.vertex_normals = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
    tri.faces = {{0, 1, 2}};
    tri.finalize();
    return tri;
}

Mesh wavy_patch() {
    // small patch with genuinely non-planar vertex normals
    Mesh m;
    Rng rng(13, 5);
    for (int i = 0; i < 3; i++) {
        m.vertices.push_back({rng.next_double(), rng.next_double(), rng.next_double() * 0.2});
        m.vertex_normals.push_back(
            normalize(Vec3{rng.next_normal() * 0.3, rng.next_normal() * 0.3, 1.0}));
    }
    m.faces = {{0, 1, 2}};
    m.finalize();
    return m;
}

}  // namespace

TEST_SUITE("adapter") {

TEST_CASE("barycentric triples sum to one") {
    auto b = adapter_barycentric_points(0.07, 0.22);
    // b3 = (1-2u, u, u) = (0.86, 0.07, 0.07)
    CHECK(b[2].x == doctest::Approx(0.86).epsilon(1e-15));
    CHECK(b[2].y == doctest::Approx(0.07).epsilon(1e-15));
    for (const auto& q : b) CHECK(q.x + q.y + q.z == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& m : adapter_midpoints(0.07, 0.22))
        CHECK(m.x + m.y + m.z == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("canonical midpoint m12 lands where the formulas say") {
    Mesh tri = canonical_triangle();
    std::array<GaussianPoint, 6> pts;
    REQUIRE(sample_face(tri, 0, AdapterConstants{}, pts));
    // m12 = (u, (1-u)/2, (1-u)/2) = (0.07, 0.465, 0.465)
    CHECK(pts[0].barycentric.x == doctest::Approx(0.07).epsilon(1e-15));
    CHECK(pts[0].position.x == doctest::Approx(0.6975).epsilon(1e-12));
    CHECK(pts[0].position.y == doctest::Approx(0.402701811).epsilon(1e-9));
    CHECK(pts[0].position.z == doctest::Approx(0.0));
}

TEST_CASE("constant vertex normals produce constant gaussian normals") {
    Mesh tri = canonical_triangle();
    std::array<GaussianPoint, 6> pts;
    REQUIRE(sample_face(tri, 0, AdapterConstants{}, pts));
    for (const auto& g : pts) {
        CHECK(length(g.normal - Vec3{0, 0, 1}) < 1e-12);
        CHECK(g.opacity == 1.0);
    }
}

TEST_CASE("uniform triangle scaling scales S_x and S_y linearly") {
    Mesh tri = canonical_triangle();
    std::array<GaussianPoint, 6> base, scaled;
    REQUIRE(sample_face(tri, 0, AdapterConstants{}, base));
    const double s = 3.5;
    for (auto& v : tri.vertices) v *= s;
    tri.finalize();
    REQUIRE(sample_face(tri, 0, AdapterConstants{}, scaled));
    for (int i = 0; i < 6; i++) {
        CHECK(scaled[i].scale.x == doctest::Approx(base[i].scale.x * s).epsilon(1e-12));
        // S_y = Area / (beta L): area scales s^2, L scales s -> net s
        CHECK(scaled[i].scale.y == doctest::Approx(base[i].scale.y * s).epsilon(1e-12));
        CHECK(scaled[i].scale.z == base[i].scale.z);  // delta unchanged
    }
}

TEST_CASE("counts: 6 per face, one per vertex") {
    Mesh ico = make_icosahedron();
    GaussianSet faces = adapt(ico, AdapterMode::face, AdapterConstants{});
    CHECK(faces.size() == 120);
    GaussianSet verts = adapt(ico, AdapterMode::vertex, AdapterConstants{});
    CHECK(verts.size() == 12);
    // face-major order: sample k of face f sits at index 6f + k
    for (size_t i = 0; i < faces.size(); i++) CHECK(faces.points[i].source_face == i / 6);
}

TEST_CASE("adapt is bit-identical across calls") {
    Mesh sphere = make_icosphere(1);
    GaussianSet a = adapt(sphere, AdapterMode::face, AdapterConstants{});
    GaussianSet b = adapt(sphere, AdapterMode::face, AdapterConstants{});
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); i++) {
        CHECK(a.points[i].position == b.points[i].position);
        CHECK(a.points[i].scale == b.points[i].scale);
        CHECK(a.points[i].normal == b.points[i].normal);
    }
}

TEST_CASE("rotations stay orthonormal under random vertex normals") {
    Rng rng(31, 7);
    for (int trial = 0; trial < 50; trial++) {
        Mesh m = wavy_patch();
        for (auto& n : m.vertex_normals)
            n = normalize(n + Vec3{rng.next_normal(), rng.next_normal(), rng.next_normal()} * 0.2);
        std::array<GaussianPoint, 6> pts;
        if (!sample_face(m, 0, AdapterConstants{}, pts)) continue;
        for (const auto& g : pts) {
            CHECK(orthonormality_error(g.rotation) < 1e-5);
            CHECK(length(g.rotation.column(2) - g.normal) < 1e-9);  // R_z = n
            CHECK(std::abs(length(g.normal) - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("points lie on the source triangle plane (flat normals)") {
    Mesh sphere = make_icosphere(1);
    // flatten vertex normals per face by sampling with face normals
    GaussianSet set = adapt(sphere, AdapterMode::face, AdapterConstants{});
    double diag = sphere.bounding_diagonal();
    for (const auto& g : set.points) {
        const auto& tri = sphere.faces[g.source_face];
        Vec3 fn = sphere.face_normal(g.source_face);
        double dist = std::abs(dot(g.position - sphere.vertices[tri[0]], fn));
        CHECK(dist < 1e-9 * diag);
    }
}

TEST_CASE("vertex mode formulas") {
    SUBCASE("star area 3 with k=1 gives S_x = 1") {
        // three triangles around vertex 0, each with area 1
        Mesh m;
        m.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {-2, 0, 0}, {0, -1, 0}};
        m.faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
        m.finalize(true);
        REQUIRE(m.face_areas[0] == doctest::Approx(1.0));
        GaussianSet set = adapt(m, AdapterMode::vertex, AdapterConstants{});
        REQUIRE(!set.empty());
        CHECK(set.points[0].scale.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(set.points[0].scale.y == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(set.points[0].scale.z == doctest::Approx(4.5e-5));
    }
    SUBCASE("normal parallel to z uses the fallback axis") {
        Mesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
        m.faces = {{0, 1, 2}};
        m.finalize(true);  // normals (0,0,1)
        GaussianSet set = adapt(m, AdapterMode::vertex, AdapterConstants{});
        REQUIRE(set.size() == 3);
        for (const auto& g : set.points) {
            CHECK(orthonormality_error(g.rotation) < 1e-6);
            CHECK(length(g.normal - Vec3{0, 0, 1}) < 1e-12);
        }
    }
    SUBCASE("flat fan keeps the plane normal") {
        Mesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {-0.5, 1, 0}};
        m.faces = {{0, 1, 2}, {0, 2, 3}};
        m.finalize(true);
        GaussianSet set = adapt(m, AdapterMode::vertex, AdapterConstants{});
        for (const auto& g : set.points) CHECK(length(g.normal - Vec3{0, 0, 1}) < 1e-12);
    }
}

TEST_CASE("empty mesh adapts to an empty set") {
    Mesh m;
    GaussianSet set = adapt(m, AdapterMode::face, AdapterConstants{});
    CHECK(set.empty());
}

TEST_CASE("analytic jacobians match finite differences") {
    Mesh m = wavy_patch();
    AdapterConstants ac;
    const double eps = 1e-6;
    for (int s = 0; s < 6; s++) {
        FaceSampleJacobian jac;
        REQUIRE(sample_face_jacobian(m, 0, ac, s, jac));
        std::array<GaussianPoint, 6> base;
        REQUIRE(sample_face(m, 0, ac, base));

        // position and scales w.r.t. vertex positions (normals held fixed)
        for (int k = 0; k < 3; k++) {
            for (int j = 0; j < 3; j++) {
                Mesh pert = m;
                pert.vertices[size_t(k)][j] += eps;
                pert.face_areas.clear();  // recompute areas; keep normals
                pert.finalize(false);
                std::array<GaussianPoint, 6> up;
                REQUIRE(sample_face(pert, 0, ac, up));
                pert = m;
                pert.vertices[size_t(k)][j] -= eps;
                pert.face_areas.clear();
                pert.finalize(false);
                std::array<GaussianPoint, 6> dn;
                REQUIRE(sample_face(pert, 0, ac, dn));

                for (int i = 0; i < 3; i++) {
                    double fd = (up[s].position[i] - dn[s].position[i]) / (2 * eps);
                    double an = jac.d_position[k].m[i][j];
                    CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)));
                }
                double fd_sx = (up[s].scale.x - dn[s].scale.x) / (2 * eps);
                CHECK(std::abs(fd_sx - jac.d_scale_x[k][j]) <=
                      1e-4 * std::max(1.0, std::abs(jac.d_scale_x[k][j])));
                double fd_sy = (up[s].scale.y - dn[s].scale.y) / (2 * eps);
                CHECK(std::abs(fd_sy - jac.d_scale_y[k][j]) <=
                      1e-4 * std::max(1.0, std::abs(jac.d_scale_y[k][j])));
            }
        }
        // normal w.r.t. vertex normals
        for (int k = 0; k < 3; k++) {
            for (int j = 0; j < 3; j++) {
                Mesh pert = m;
                pert.vertex_normals[size_t(k)][j] += eps;
                std::array<GaussianPoint, 6> up;
                REQUIRE(sample_face(pert, 0, ac, up));
                pert = m;
                pert.vertex_normals[size_t(k)][j] -= eps;
                std::array<GaussianPoint, 6> dn;
                REQUIRE(sample_face(pert, 0, ac, dn));
                for (int i = 0; i < 3; i++) {
                    double fd = (up[s].normal[i] - dn[s].normal[i]) / (2 * eps);
                    double an = jac.d_normal[k].m[i][j];
                    CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)));
                }
            }
        }
    }
}

TEST_CASE("gaussian table round trip") {
    Mesh sphere = make_icosphere(1);
    GaussianSet set = adapt(sphere, AdapterMode::face, AdapterConstants{});
    auto path = (std::filesystem::temp_directory_path() / "geosplat_gauss.bin").string();
    save_gaussians(set, path);
    GaussianSet back = load_gaussians(path);
    REQUIRE(back.size() == set.size());
    for (size_t i = 0; i < set.size(); i += 17) {
        CHECK(length(back.points[i].position - set.points[i].position) < 1e-12);
        CHECK(length(back.points[i].scale - set.points[i].scale) < 1e-12);
        CHECK(orthonormality_error(back.points[i].rotation) < 1e-9);
        // quaternion round trip preserves the rotation
        Mat3 diff = transpose(back.points[i].rotation) * set.points[i].rotation;
        CHECK(diff.m[0][0] + diff.m[1][1] + diff.m[2][2] == doctest::Approx(3.0).epsilon(1e-9));
    }
    std::remove(path.c_str());
}

}  // TEST_SUITE
