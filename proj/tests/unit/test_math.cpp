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

#include "geosplat/math.hpp"
#include "geosplat/rng.hpp"

using namespace geosplat;

TEST_SUITE("math") {

TEST_CASE("quaternion round trip preserves random rotations") {
    Rng rng(1, 2);
    for (int i = 0; i < 200; i++) {
        Vec3 axis = normalize(
            Vec3{rng.next_normal(), rng.next_normal(), rng.next_normal()});
        Mat3 r = rotation_about_axis(axis, rng.next_double() * 2 * kPi);
        Mat3 back = matrix_from_quaternion(quaternion_from_matrix(r));
        for (int a = 0; a < 3; a++)
            for (int b = 0; b < 3; b++) CHECK(back.m[a][b] == doctest::Approx(r.m[a][b]).epsilon(1e-12));
    }
}

TEST_CASE("orthonormal basis completes any unit vector") {
    Rng rng(3, 4);
    for (int i = 0; i < 500; i++) {
        Vec3 n = normalize(Vec3{rng.next_normal(), rng.next_normal(), rng.next_normal()});
        Vec3 t, b;
        orthonormal_basis(n, t, b);
        CHECK(std::abs(length(t) - 1) < 1e-12);
        CHECK(std::abs(length(b) - 1) < 1e-12);
        CHECK(std::abs(dot(t, n)) < 1e-12);
        CHECK(std::abs(dot(b, n)) < 1e-12);
        CHECK(std::abs(dot(t, b)) < 1e-12);
        // right-handed
        CHECK(dot(cross(t, b), n) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("rigid inverse composes to identity") {
    Mat3 r = rotation_about_axis(normalize(Vec3{1, 2, -0.5}), 1.1);
    Mat4 m = Mat4::from_rotation_translation(r, {0.3, -2, 5});
    Mat4 ident = m * rigid_inverse(m);
    for (int a = 0; a < 4; a++)
        for (int b = 0; b < 4; b++)
            CHECK(ident.m[a][b] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("counter-based rng reproduces streams independent of call order") {
    Rng a(42, 7), b(42, 7);
    for (int i = 0; i < 10; i++) CHECK(a.next_u64() == b.next_u64());
    // different streams decorrelate
    Rng c(42, 8);
    CHECK(Rng(42, 7).next_u64() != c.next_u64());
}

}  // TEST_SUITE
