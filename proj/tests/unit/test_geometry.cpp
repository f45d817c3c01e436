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

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "geosplat/grid.hpp"
#include "geosplat/mesh.hpp"

using namespace geosplat;

namespace {
Box3 unit_box(double half) {
    Box3 b;
    b.expand(Vec3{-half, -half, -half});
    b.expand(Vec3{half, half, half});
    return b;
}
}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("marching cubes on a sphere field") {
    ScalarGrid grid(32, 32, 32, unit_box(2.0));
    grid.fill([](const Vec3& p) { return length(p) - 1.0; });
    auto iso = extract_isosurface(grid, 0.0);
    REQUIRE(!iso.empty);
    REQUIRE(iso.mesh.face_count() > 0);

    SUBCASE("vertices lie on the analytic sphere") {
        double worst = 0;
        for (const auto& v : iso.mesh.vertices) worst = std::max(worst, std::abs(length(v) - 1.0));
        CHECK(worst < 0.02);
    }
    SUBCASE("watertight: every edge shared by exactly two faces") {
        CHECK(is_watertight(iso.mesh));
    }
    SUBCASE("faces reference valid vertices with positive area") {
        for (const auto& tri : iso.mesh.faces)
            for (uint32_t vi : tri) CHECK(vi < iso.mesh.vertex_count());
        for (double a : iso.mesh.face_areas) CHECK(a > 0);
    }
    SUBCASE("normals point outward (toward increasing field)") {
        size_t outward = 0;
        for (size_t f = 0; f < iso.mesh.face_count(); f++) {
            const auto& tri = iso.mesh.faces[f];
            Vec3 centroid = (iso.mesh.vertices[tri[0]] + iso.mesh.vertices[tri[1]] +
                             iso.mesh.vertices[tri[2]]) /
                            3.0;
            if (dot(iso.mesh.face_normal(f), centroid) > 0) outward++;
        }
        CHECK(outward == iso.mesh.face_count());
    }
}

TEST_CASE("uniformly positive field yields empty mesh with flag") {
    ScalarGrid grid(8, 8, 8, unit_box(1.0));
    grid.fill([](const Vec3&) { return 0.75; });
    auto iso = extract_isosurface(grid, 0.0);
    CHECK(iso.empty);
    CHECK(iso.mesh.face_count() == 0);
}

TEST_CASE("linear field gives a planar isosurface with axis normals") {
    ScalarGrid grid(9, 9, 9, unit_box(1.0));
    grid.fill([](const Vec3& p) { return p.x - 0.125; });  // crosses mid-cell
    auto iso = extract_isosurface(grid, 0.0);
    REQUIRE(!iso.empty);
    for (const auto& v : iso.mesh.vertices) CHECK(v.x == doctest::Approx(0.125).epsilon(1e-9));
    for (const auto& n : iso.mesh.vertex_normals) {
        CHECK(std::abs(n.x) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(n.y) < 1e-6);
        CHECK(std::abs(n.z) < 1e-6);
        CHECK(n.x > 0);  // toward increasing field
    }
}

TEST_CASE("entropy loss") {
    SUBCASE("all-positive grid gives zero") {
        ScalarGrid grid(4, 4, 4, unit_box(1.0));
        grid.fill([](const Vec3&) { return 0.3; });
        CHECK(entropy_loss(grid) == 0.0);
    }
    SUBCASE("single sign-crossing edge matches hand-evaluated BCE") {
        // grid 2x2x2 arranged so exactly one edge changes sign
        ScalarGrid grid(2, 2, 2, unit_box(1.0));
        for (auto& v : grid.values) v = 1.0;
        grid.at(0, 0, 0) = 1.0;
        grid.at(1, 0, 0) = -1.0;
        // edges incident to the flipped node change sign: (0,0,0)-(1,0,0),
        // (1,0,0)-(1,1,0), (1,0,0)-(1,0,1); each contributes
        // H(sigma(1),0) + H(sigma(-1),1) = 2 ln(1 + e)
        double per_edge = 2.6265233750364456681;
        CHECK(entropy_loss(grid) == doctest::Approx(3 * per_edge).epsilon(1e-12));
    }
    SUBCASE("flipping every sign leaves the loss unchanged") {
        ScalarGrid grid(5, 4, 3, unit_box(1.0));
        grid.fill([](const Vec3& p) { return std::sin(5 * p.x) + p.y - 0.2 * p.z; });
        double a = entropy_loss(grid);
        for (auto& v : grid.values) v = -v;
        CHECK(entropy_loss(grid) == doctest::Approx(a).epsilon(1e-12));
    }
    SUBCASE("loss decreases as crossing magnitudes grow apart") {
        double prev = kInf;
        for (double t : {0.5, 1.0, 2.0, 4.0}) {
            ScalarGrid grid(2, 2, 2, unit_box(1.0));
            for (auto& v : grid.values) v = t;
            grid.at(0, 0, 0) = -t;
            double loss = entropy_loss(grid);
            CHECK(loss < prev);
            CHECK(loss >= 0);
            prev = loss;
        }
    }
}

TEST_CASE("area-weighted normals") {
    SUBCASE("flat fan in the z=0 plane") {
        Mesh fan;
        fan.vertices.push_back({0, 0, 0});
        const int spokes = 6;
        for (int i = 0; i <= spokes; i++) {
            double a = i * 0.4;
            fan.vertices.push_back({std::cos(a), std::sin(a), 0});
        }
        for (int i = 1; i <= spokes; i++) fan.faces.push_back({0, uint32_t(i), uint32_t(i + 1)});
        auto normals = area_weighted_normals(fan);
        for (size_t i = 0; i < fan.vertices.size(); i++)
            CHECK(length(normals[i] - Vec3{0, 0, 1}) < 1e-12);
    }
    SUBCASE("octahedron vertex normals point along axes") {
        Mesh oct;
        oct.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        oct.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                     {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
        auto normals = area_weighted_normals(oct);
        for (size_t i = 0; i < 6; i++)
            CHECK(length(normals[i] - normalize(oct.vertices[i])) < 1e-12);
    }
    SUBCASE("icosphere normals within 2 degrees of radial") {
        Mesh sphere = make_icosphere(2);
        auto normals = area_weighted_normals(sphere);
        for (size_t i = 0; i < sphere.vertex_count(); i++)
            CHECK(degrees(angle_between(normals[i], sphere.vertices[i])) < 2.0);
    }
    SUBCASE("isolated vertex falls back to +z") {
        Mesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}};
        m.faces = {{0, 1, 2}};
        size_t isolated = 0;
        auto normals = area_weighted_normals(m, &isolated);
        CHECK(isolated == 1);
        CHECK(normals[3] == Vec3{0, 0, 1});
    }
}

TEST_CASE("grid serialization round trip") {
    ScalarGrid grid(5, 6, 7, unit_box(1.5));
    grid.fill([](const Vec3& p) { return p.x * 2 + p.y - p.z * 0.5; });
    auto path = (std::filesystem::temp_directory_path() / "geosplat_grid.bin").string();
    save_grid(grid, path);
    ScalarGrid back = load_grid(path);
    CHECK(back.nx == 5);
    CHECK(back.ny == 6);
    CHECK(back.nz == 7);
    CHECK(back.values == grid.values);
    CHECK(back.bounds.lo == grid.bounds.lo);
    std::remove(path.c_str());
}

TEST_CASE("mesh generators are watertight") {
    CHECK(is_watertight(make_icosahedron()));
    CHECK(is_watertight(make_icosphere(2)));
    CHECK(is_watertight(make_box({-1, -1, -1}, {1, 2, 3})));
}

}  // TEST_SUITE
