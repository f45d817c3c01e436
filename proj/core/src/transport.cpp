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

#include "geosplat/transport.hpp"

#include "geosplat/parallel.hpp"
#include "geosplat/rng.hpp"

namespace geosplat {

bool occlusion(const Bvh& bvh, const Vec3& x, const Vec3& wi, const Vec3& normal) {
    const double diag = bvh.scene_diagonal();
    Ray ray;
    ray.origin = x + wi * (kRayBias * diag) + normal * (kNormalBias * diag);
    ray.direction = wi;
    ray.t_min = 0;
    ray.t_max = 4.0 * diag;
    return bvh.any_hit(ray);
}

namespace {

struct SampleSet {
    // per sample: direction, pdf, 1/branch-count weight, branch flag
    struct Entry {
        Vec3 wi;
        double pdf;
        double scale;
        bool specular;
    };
    std::vector<Entry> entries;
};

/// Draws the branch-split sample set: half cosine (diffuse lobe), half GGX
/// (specular lobe). Distribution parameters come from `sampling_mat` only,
/// so callers that hold it fixed get an estimate that is smooth in the live
/// material. GGX directions below the horizon are dropped (their lobe
/// integrand is zero there), which keeps both branches unbiased.
SampleSet draw_samples(const Vec3& n, const Vec3& wo, const MaterialSample& sampling_mat,
                       int total, uint64_t seed, uint64_t stream) {
    SampleSet set;
    int n_cos = (total + 1) / 2;
    int n_ggx = total / 2;
    Rng rng(seed, stream);
    set.entries.reserve(size_t(total));
    for (int s = 0; s < n_cos; s++) {
        Vec2 u = rng.next_vec2();
        DirectionSample ds = sample_cosine(n, u.x, u.y);
        if (ds.pdf <= 0) continue;
        set.entries.push_back({ds.direction, ds.pdf, 1.0 / n_cos, false});
    }
    for (int s = 0; s < n_ggx; s++) {
        Vec2 u = rng.next_vec2();
        DirectionSample ds;
        if (!sample_ggx(sampling_mat, n, wo, u.x, u.y, ds)) continue;  // zero contribution
        set.entries.push_back({ds.direction, ds.pdf, 1.0 / n_ggx, true});
    }
    return set;
}

}  // namespace

RadianceEstimate estimate_radiance(const Vec3& x, const Vec3& n, const Vec3& wo,
                                   const MaterialSample& mat, const EnvironmentLight& env,
                                   const IndirectLight& indirect, const Bvh* bvh,
                                   const TransportOptions& opt, uint64_t stream) {
    RadianceEstimate out{};
    SampleSet set = draw_samples(n, wo, mat, std::max(1, opt.samples), opt.seed, stream);
    const double diffuse_light_factor = (1.0 - mat.metalness) / kPi;
    for (const auto& s : set.entries) {
        double cos_i = dot(n, s.wi);
        if (cos_i <= 0) continue;
        double occluded =
            (opt.occlusion_enabled && bvh) ? (occlusion(*bvh, x, s.wi, n) ? 1.0 : 0.0) : 0.0;
        Vec3 li = compose_incident(env, indirect, occluded, s.wi);
        BrdfTerms f = eval_brdf_terms(mat, n, s.wi, wo);
        double w = cos_i / s.pdf * s.scale;
        if (s.specular) {
            out.specular += f.specular * li * w;
            out.specular_light += li * (f.specular_no_fresnel * w);
        } else {
            out.diffuse += f.diffuse * li * w;
            out.diffuse_light += li * (diffuse_light_factor * w);
        }
    }
    out.color = out.diffuse + out.specular;
    return out;
}

RadianceEstimateGrad estimate_radiance_grad(const Vec3& x, const Vec3& n, const Vec3& wo,
                                            const MaterialSample& mat,
                                            const MaterialSample& sampling_mat,
                                            const EnvironmentLight& env,
                                            const IndirectLight& indirect, const Bvh* bvh,
                                            const TransportOptions& opt, uint64_t stream) {
    RadianceEstimateGrad out{};
    SampleSet set = draw_samples(n, wo, sampling_mat, std::max(1, opt.samples), opt.seed, stream);
    const double m = mat.metalness;
    const double diffuse_light_factor = (1.0 - m) / kPi;

    double sh_values[9];
    const int sh_count = int(indirect.coefficients.size());

    for (const auto& s : set.entries) {
        double cos_i = dot(n, s.wi);
        if (cos_i <= 0) continue;
        double occluded =
            (opt.occlusion_enabled && bvh) ? (occlusion(*bvh, x, s.wi, n) ? 1.0 : 0.0) : 0.0;
        BrdfGrad f = eval_brdf_grad(mat, n, s.wi, wo);
        double w = cos_i / s.pdf * s.scale;

        // lobe term and its material derivatives for this branch
        Vec3 term, d_alb, d_rough, d_metal;
        double f_diff_light = 0, f_spec_nf = 0;
        if (s.specular) {
            term = f.value.specular;
            for (int c = 0; c < 3; c++) {
                d_alb[c] = f.d_albedo[c] - (1.0 - m) / kPi;
                d_metal[c] = f.d_metalness[c] + mat.albedo[c] / kPi;
            }
            d_rough = f.d_roughness;
            f_spec_nf = f.value.specular_no_fresnel;
        } else {
            term = f.value.diffuse;
            for (int c = 0; c < 3; c++) {
                d_alb[c] = (1.0 - m) / kPi;
                d_metal[c] = -mat.albedo[c] / kPi;
            }
            d_rough = {0, 0, 0};
            f_diff_light = diffuse_light_factor;
        }

        Vec3 li;
        if (occluded < 0.5) {
            Vec2 uv = direction_to_latlong(s.wi);
            BilinearTaps taps =
                latlong_taps(env.radiance.width(), env.radiance.height(), uv.x, uv.y);
            li = {0, 0, 0};
            for (int i = 0; i < 4; i++) {
                li += env.radiance.pixel3(taps.y[i], taps.x[i]) * taps.w[i];
                out.env_taps.push_back(
                    {taps.x[i], taps.y[i], w * taps.w[i], term, f_diff_light, f_spec_nf});
            }
        } else {
            Vec3 unclamped{0, 0, 0};
            for (int i = 0; i < sh_count; i++) {
                sh_values[i] = sh_basis(i, s.wi);
                unclamped += indirect.coefficients[size_t(i)] * sh_values[i];
            }
            li = max(unclamped, Vec3{0, 0, 0});
            Vec3 mask{unclamped.x > 0 ? 1.0 : 0.0, unclamped.y > 0 ? 1.0 : 0.0,
                      unclamped.z > 0 ? 1.0 : 0.0};
            for (int i = 0; i < sh_count; i++)
                out.sh_taps.push_back(
                    {i, w * sh_values[i], mask, term, f_diff_light, f_spec_nf});
        }

        if (s.specular) {
            out.value.specular += term * li * w;
            out.value.specular_light += li * (f_spec_nf * w);
            out.d_spec_light_d_rough += li * (f.d_spec_nf_d_rough * w);
        } else {
            out.value.diffuse += term * li * w;
            out.value.diffuse_light += li * (f_diff_light * w);
            out.d_diffuse_light_d_metal += li * (-w / kPi);
        }
        out.d_albedo += d_alb * li * w;
        out.d_roughness += d_rough * li * w;
        out.d_metalness += d_metal * li * w;
    }
    out.value.color = out.value.diffuse + out.value.specular;
    return out;
}

RaycastResult raycast_view(const Bvh& bvh, const View& view) {
    RaycastResult result;
    result.depth = Image(view.width, view.height, 1, kInf);
    result.normal = Image(view.width, view.height, 3, 0.0);
    result.position = Image(view.width, view.height, 3, 0.0);
    result.hit_mask = Image(view.width, view.height, 1, 0.0);
    const Vec3 origin = view.camera_position();
    const Mesh& mesh = bvh.mesh();

    parallel_for(size_t(view.height), [&](size_t row) {
        int y = int(row);
        for (int x = 0; x < view.width; x++) {
            Ray ray;
            ray.origin = origin;
            ray.direction = view.pixel_ray_direction(x, y);
            ray.t_min = 0;
            Hit hit = bvh.closest_hit(ray);
            if (!hit.valid()) continue;
            Vec3 p = ray.origin + ray.direction * hit.t;
            const auto& tri = mesh.faces[hit.face];
            Vec3 nrm = normalize(mesh.vertex_normals[tri[0]] * (1 - hit.bary_u - hit.bary_v) +
                                 mesh.vertex_normals[tri[1]] * hit.bary_u +
                                 mesh.vertex_normals[tri[2]] * hit.bary_v);
            result.depth.at(y, x) = view.depth_of(p);
            result.normal.set_pixel3(y, x, nrm);
            result.position.set_pixel3(y, x, p);
            result.hit_mask.at(y, x) = 1.0;
        }
    });
    return result;
}

}  // namespace geosplat
