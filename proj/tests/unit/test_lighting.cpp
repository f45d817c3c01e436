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

#include "geosplat/lighting.hpp"
#include "geosplat/rng.hpp"
#include "geosplat/selftest.hpp"

using namespace geosplat;

namespace {

EnvironmentLight constant_env(const Vec3& c, int h = 16) {
    EnvironmentLight env;
    env.radiance = Image(2 * h, h, 3);
    for (int y = 0; y < h; y++)
        for (int x = 0; x < 2 * h; x++) env.radiance.set_pixel3(y, x, c);
    return env;
}

}  // namespace

TEST_SUITE("lighting") {

TEST_CASE("constant environment stays constant through all tables") {
    const Vec3 c{0.8, 0.6, 0.4};
    EnvironmentLight env = constant_env(c, 16);
    precompute_splitsum(env);
    Rng rng(3, 3);
    for (int i = 0; i < 50; i++) {
        Vec3 d = normalize(Vec3{rng.next_normal(), rng.next_normal(), rng.next_normal()});
        // prefiltered pyramid: filtering a constant is the constant
        for (double rho : {0.0, 0.35, 0.7, 1.0}) {
            Vec3 v = env.sample_prefiltered(d, rho);
            CHECK(v.x == doctest::Approx(c.x).epsilon(1e-12));
            CHECK(v.z == doctest::Approx(c.z).epsilon(1e-12));
        }
        // normalized cosine convolution of a constant is the constant exactly
        Vec3 irr = env.sample_irradiance(d);
        CHECK(irr.x == doctest::Approx(c.x).epsilon(1e-12));
        CHECK(irr.y == doctest::Approx(c.y).epsilon(1e-12));
    }
}

TEST_CASE("LUT at (n.v = 1, rho = 0.05): scale + bias == 1 within 0.02") {
    EnvironmentLight env = constant_env({1, 1, 1}, 4);
    precompute_brdf_lut(env, {});
    Vec2 ab = env.sample_lut(1.0, 0.05);
    CHECK(ab.x + ab.y == doctest::Approx(1.0).epsilon(0.02));
    CHECK(ab.x >= 0);
    CHECK(ab.y >= 0);
    CHECK(ab.x <= 1.05);
    CHECK(ab.y <= 1.05);
}

TEST_CASE("split-sum shading closed cases") {
    SUBCASE("constant env, m=0, a=1, rho=1: diffuse contribution is c") {
        const Vec3 c{0.35, 0.5, 0.65};
        EnvironmentLight env = constant_env(c, 16);
        precompute_splitsum(env);
        MaterialSample mat({1, 1, 1}, 1.0, 0.0);
        Vec3 n{0, 0, 1};
        SplitSumShade s = shade_splitsum(mat, n, n, env);
        CHECK(s.diffuse_light.x == doctest::Approx(c.x).epsilon(1e-9));
        // full color = diffuse + dielectric specular; the diffuse part alone is c
        Vec3 diffuse_part = mat.albedo * s.diffuse_light * (1.0 - mat.metalness);
        CHECK(diffuse_part.y == doctest::Approx(c.y).epsilon(1e-12));
    }
    SUBCASE("mirror metal picks the hot texel at the reflection direction") {
        EnvironmentLight env = constant_env({0.05, 0.05, 0.05}, 32);
        // place a hot texel exactly at the reflection of wo about n
        Vec3 n = normalize(Vec3{0.2, 0.9, 0.1});
        Vec3 wo = normalize(Vec3{-0.3, 0.8, 0.4});
        Vec3 r = reflect(wo, n);
        Vec2 uv = direction_to_latlong(r);
        int tx = int(uv.x * env.radiance.width());
        int ty = int(uv.y * env.radiance.height());
        // re-center the direction on the texel center so bilinear hits it exactly
        r = latlong_to_direction((tx + 0.5) / env.radiance.width(),
                                 (ty + 0.5) / env.radiance.height());
        // solve for wo with the same n: reflect is an involution
        wo = reflect(r, n);
        env.radiance.set_pixel3(ty, tx, {9.0, 9.0, 9.0});
        precompute_splitsum(env);
        MaterialSample mat({1, 1, 1}, 0.0, 1.0);
        SplitSumShade s = shade_splitsum(mat, n, wo, env);
        CHECK(s.color.x == doctest::Approx(9.0).epsilon(0.05));
    }
    SUBCASE("zero albedo dielectric keeps only the 0.04-scaled specular") {
        EnvironmentLight env = constant_env({1, 1, 1}, 16);
        precompute_splitsum(env);
        MaterialSample mat({0, 0, 0}, 0.3, 0.0);
        Vec3 n{0, 0, 1};
        Vec3 wo = normalize(Vec3{0.3, 0, 1});
        SplitSumShade s = shade_splitsum(mat, n, wo, env);
        Vec2 ab = env.sample_lut(dot(n, wo), 0.3);
        Vec3 expected = env.sample_prefiltered(reflect(wo, n), 0.3) * (0.04 * ab.x + ab.y);
        CHECK(s.color.x == doctest::Approx(expected.x).epsilon(1e-12));
        // and the diffuse part vanishes
        Vec3 diffuse_part = mat.albedo * s.diffuse_light;
        CHECK(diffuse_part.x == 0.0);
    }
}

TEST_CASE("compose_incident switches between direct and SH") {
    EnvironmentLight env = constant_env({2, 3, 4}, 8);
    IndirectLight ind(0);
    ind.coefficients[0] = Vec3{1, 1, 1};
    Vec3 wi = normalize(Vec3{1, 1, 0});
    SUBCASE("O = 0 gives the environment exactly") {
        Vec3 v = compose_incident(env, ind, 0.0, wi);
        CHECK(v.x == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("O = 1 gives the SH evaluation exactly") {
        Vec3 v = compose_incident(env, ind, 1.0, wi);
        // degree-0: coefficient * Y00 with Y00 = 0.282095
        CHECK(v.x == doctest::Approx(0.28209479177387814).epsilon(1e-12));
    }
    SUBCASE("SH radiance is clamped at zero") {
        IndirectLight neg(0);
        neg.coefficients[0] = {-3, -3, -3};
        CHECK(neg.eval(wi) == Vec3{0, 0, 0});
    }
}

TEST_CASE("prefiltered mip maxima never exceed the mip-0 max") {
    EnvironmentLight env = selftest::overhead_environment(16);
    precompute_splitsum(env);
    double max0 = 0;
    for (double v : env.prefiltered[0].raw()) max0 = std::max(max0, v);
    for (const auto& level : env.prefiltered)
        for (double v : level.raw()) CHECK(v <= max0 + 1e-12);
}

TEST_CASE("split-sum cache round trip") {
    EnvironmentLight env = selftest::smooth_environment(16);
    SplitSumParams params;
    params.mips = 4;
    params.lut_size = 16;
    params.lut_samples = 256;
    params.prefilter_samples = 32;
    precompute_splitsum(env, params);
    auto path = (std::filesystem::temp_directory_path() / "geosplat_ss.bin").string();
    save_splitsum_cache(env, params, path);
    EnvironmentLight loaded;
    loaded.radiance = env.radiance;
    REQUIRE(load_splitsum_cache(loaded, params, path));
    CHECK(loaded.prefiltered.size() == env.prefiltered.size());
    CHECK(loaded.irradiance.raw() == env.irradiance.raw());
    CHECK(loaded.lut == env.lut);
    // a different radiance misses the cache (content hash key)
    EnvironmentLight other = constant_env({1, 1, 1}, 16);
    CHECK_FALSE(load_splitsum_cache(other, params, path));
    std::remove(path.c_str());
}

TEST_CASE("SH basis values at the poles") {
    CHECK(sh_basis(0, {0, 0, 1}) == doctest::Approx(0.28209479177387814).epsilon(1e-15));
    CHECK(sh_basis(2, {0, 0, 1}) == doctest::Approx(0.4886025119029199).epsilon(1e-15));
    CHECK(sh_basis(6, {0, 0, 1}) == doctest::Approx(0.31539156525252005 * 2).epsilon(1e-12));
}

TEST_CASE("upsample adjoint is the transpose of upsample") {
    // <A x, y> == <x, A^T y> for random x, y
    Rng rng(41, 4);
    Image coarse(8, 4, 3);
    for (auto& v : coarse.raw()) v = rng.next_double();
    Image up = upsample_latlong(coarse, 16, 8);
    Image y(16, 8, 3);
    for (auto& v : y.raw()) v = rng.next_double();
    double lhs = 0;
    for (size_t i = 0; i < up.size(); i++) lhs += up.raw()[i] * y.raw()[i];
    Image adj(8, 4, 3, 0.0);
    upsample_latlong_adjoint(y, adj);
    double rhs = 0;
    for (size_t i = 0; i < coarse.size(); i++) rhs += coarse.raw()[i] * adj.raw()[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("table backprop is the transpose of the precompute") {
    // directional check: d/dt [tables(radiance + t * delta)] vs adjoint
    SplitSumParams params;
    params.mips = 3;
    params.lut_size = 8;
    params.lut_samples = 64;
    params.prefilter_samples = 32;
    params.irradiance_width = 8;
    EnvironmentLight env = selftest::smooth_environment(8);
    precompute_radiance_tables(env, params);

    Rng rng(43, 6);
    Image delta(env.radiance.width(), env.radiance.height(), 3);
    for (auto& v : delta.raw()) v = rng.next_normal();
    EnvTableGrad grad;
    grad.init(env);
    for (auto& v : grad.d_irradiance.raw()) v = rng.next_normal();
    for (auto& lvl : grad.d_prefiltered)
        for (auto& v : lvl.raw()) v = rng.next_normal();

    Image d_radiance = backprop_tables_to_radiance(env, params, grad);
    double adjoint_dot = 0;
    for (size_t i = 0; i < delta.size(); i++) adjoint_dot += d_radiance.raw()[i] * delta.raw()[i];

    const double eps = 1e-5;
    EnvironmentLight up = env, dn = env;
    for (size_t i = 0; i < delta.size(); i++) {
        up.radiance.raw()[i] += eps * delta.raw()[i];
        dn.radiance.raw()[i] -= eps * delta.raw()[i];
    }
    precompute_radiance_tables(up, params);
    precompute_radiance_tables(dn, params);
    double fd_dot = 0;
    for (size_t i = 0; i < grad.d_irradiance.size(); i++)
        fd_dot += grad.d_irradiance.raw()[i] *
                  (up.irradiance.raw()[i] - dn.irradiance.raw()[i]) / (2 * eps);
    for (size_t l = 0; l < grad.d_prefiltered.size(); l++)
        for (size_t i = 0; i < grad.d_prefiltered[l].size(); i++)
            fd_dot += grad.d_prefiltered[l].raw()[i] *
                      (up.prefiltered[l].raw()[i] - dn.prefiltered[l].raw()[i]) / (2 * eps);
    CHECK(fd_dot == doctest::Approx(adjoint_dot).epsilon(1e-6));
}

}  // TEST_SUITE
