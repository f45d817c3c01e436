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

#include "geosplat/fit.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "geosplat/blob_io.hpp"
#include "geosplat/parallel.hpp"

namespace geosplat {

// ---------------------------------------------------------------------------
// Context and parameters
// ---------------------------------------------------------------------------

FitContext FitContext::prepare(const Scene& scene) {
    FitContext ctx;
    ctx.mesh = scene.mesh;
    ctx.bvh.build(ctx.mesh);
    ctx.gaussians = adapt(ctx.mesh, AdapterMode::face, scene.config.adapter);
    ctx.views = scene.views;
    ctx.env = scene.env;
    if (!ctx.env.tables_ready()) precompute_splitsum(ctx.env, ctx.splitsum);

    const size_t n = ctx.gaussians.size();
    ctx.caches.reserve(ctx.views.size());
    ctx.visible.resize(ctx.views.size());
    ctx.wo.resize(ctx.views.size());
    for (size_t v = 0; v < ctx.views.size(); v++) {
        ctx.caches.push_back(build_splat_cache(ctx.gaussians, ctx.views[v]));
        std::vector<char> seen(n, 0);
        for (const auto& pixel : ctx.caches.back().pixel_weights)
            for (const auto& [idx, w] : pixel) seen[idx] = 1;
        for (uint32_t i = 0; i < n; i++)
            if (seen[i]) ctx.visible[v].push_back(i);
        ctx.wo[v].resize(n);
        const Vec3 cam = ctx.views[v].camera_position();
        for (size_t i = 0; i < n; i++)
            ctx.wo[v][i] = normalize(cam - ctx.gaussians.points[i].position);
    }
    return ctx;
}

double FitParameters::get(size_t i) const {
    if (i < field_count()) return field.parameters()[i];
    i -= field_count();
    if (i < env_count()) return env_log.raw()[i];
    i -= env_count();
    return (&sh.coefficients[i / 3].x)[i % 3];
}

void FitParameters::add(size_t i, double delta) {
    if (i < field_count()) {
        field.parameters()[i] += delta;
        return;
    }
    i -= field_count();
    if (i < env_count()) {
        env_log.raw()[i] += delta;
        return;
    }
    i -= env_count();
    (&sh.coefficients[i / 3].x)[i % 3] += delta;
}

bool FitParameters::all_finite() const {
    for (double v : field.parameter_vector())
        if (!std::isfinite(v)) return false;
    if (!env_log.all_finite()) return false;
    for (const auto& c : sh.coefficients)
        if (!is_finite(c)) return false;
    return true;
}

FitState make_initial_state(const FitContext& ctx, const RunConfig& config) {
    config.validate();
    FitState state;
    state.config = config;
    state.params.field = MaterialField::for_bounds(ctx.mesh.bounds());
    // learnable env texels start from the scene light (log-radiance)
    const int eh = config.env_fit_height, ew = 2 * config.env_fit_height;
    state.params.env_log = Image(ew, eh, 3);
    for (int y = 0; y < eh; y++)
        for (int x = 0; x < ew; x++) {
            Vec3 v = sample_latlong(ctx.env.radiance,
                                    latlong_to_direction((x + 0.5) / ew, (y + 0.5) / eh));
            state.params.env_log.set_pixel3(
                y, x, {std::log(std::max(v.x, 1e-4)), std::log(std::max(v.y, 1e-4)),
                       std::log(std::max(v.z, 1e-4))});
        }
    state.params.sh = IndirectLight(config.sh_degree);
    state.adam_m.assign(state.params.size(), 0.0);
    state.adam_v.assign(state.params.size(), 0.0);
    state.stage = state.stage_at(0);
    return state;
}

// ---------------------------------------------------------------------------
// Loss evaluation
// ---------------------------------------------------------------------------

namespace {

/// Builds the working light for one evaluation. When the environment is
/// being optimized the radiance comes from the learnable texels; the BRDF
/// lookup table is radiance-independent and copied from the context.
EnvironmentLight make_working_env(const FitContext& ctx, const FitParameters& params,
                                  const RunConfig& config, bool need_tables) {
    EnvironmentLight env;
    Image radiance(params.env_log.width(), params.env_log.height(), 3);
    for (size_t i = 0; i < radiance.size(); i++)
        radiance.raw()[i] = std::exp(params.env_log.raw()[i]);
    env.radiance =
        upsample_latlong(radiance, ctx.env.radiance.width(), ctx.env.radiance.height());
    if (need_tables) {
        precompute_radiance_tables(env, ctx.splitsum);
        env.lut = ctx.env.lut;
        env.lut_size = ctx.env.lut_size;
    }
    return env;
}

}  // namespace

LossReport evaluate_iteration(const FitContext& ctx, const FitParameters& params,
                              const RunConfig& config, int iteration,
                              const std::optional<ScalarGrid>& grid, std::vector<double>* grad,
                              const std::vector<MaterialSample>* sampling_override) {
    const size_t view_index = ctx.views.empty() ? 0 : size_t(iteration) % ctx.views.size();
    const View& view = ctx.views[view_index];
    if (!view.target_image) throw std::invalid_argument("fit: view has no target image");
    const SplatCache& cache = ctx.caches[view_index];
    const auto& vis = ctx.visible[view_index];
    const size_t n = ctx.gaussians.size();

    const bool warmup =
        iteration < int(config.warmup_fraction * config.iterations) || config.iterations == 0;

    EnvironmentLight working_env;
    const EnvironmentLight* env = &ctx.env;
    if (config.optimize_environment) {
        working_env = make_working_env(ctx, params, config, warmup);
        env = &working_env;
    }

    // shade the visible points
    std::vector<Vec3> color(n), ld(n), ls(n);
    std::vector<MaterialField::QueryGrad> fq(vis.size());
    std::vector<SplitSumShadeGrad> sg(warmup ? vis.size() : 0);
    std::vector<RadianceEstimateGrad> mg(warmup ? 0 : vis.size());
    TransportOptions topt;
    topt.samples = config.mc_samples_fit;
    topt.occlusion_enabled = config.occlusion_enabled;
    topt.seed = config.rng_seed;

    parallel_for(vis.size(), [&](size_t k) {
        const uint32_t idx = vis[k];
        const GaussianPoint& g = ctx.gaussians.points[idx];
        fq[k] = params.field.query_with_gradient(g.position);
        const MaterialSample& mat = fq[k].sample;
        const Vec3& wo = ctx.wo[view_index][idx];
        if (warmup) {
            sg[k] = shade_splitsum_grad(mat, g.normal, wo, *env);
            color[idx] = sg[k].value.color;
            ld[idx] = sg[k].value.diffuse_light;
            ls[idx] = sg[k].value.specular_light;
        } else {
            const MaterialSample& smat = sampling_override ? (*sampling_override)[idx] : mat;
            mg[k] = estimate_radiance_grad(g.position, g.normal, wo, mat, smat, *env, params.sh,
                                           &ctx.bvh, topt, stream_id(uint64_t(iteration), idx));
            color[idx] = mg[k].value.color;
            ld[idx] = mg[k].value.diffuse_light;
            ls[idx] = mg[k].value.specular_light;
        }
    });

    Image pred = composite(cache, color);
    Image ld_img = composite(cache, ld);
    Image ls_img = composite(cache, ls);
    const Image& alpha = cache.alpha;
    const Image& gt = *view.target_image;
    Image mask = view.target_mask ? *view.target_mask : alpha;

    LossReport report;
    report.ssim_w = config.weights.ssim;
    report.mask_w = config.weights.mask;
    report.sdf_w = sdf_weight_at(config.weights, iteration, config.iterations);
    report.smooth_w = config.weights.smooth;
    report.light_w = config.weights.light;

    Image d_pred, d_alpha, d_ld_img, d_ls_img;
    if (grad) {
        grad->assign(params.size(), 0.0);
        auto pc = photometric_loss_grad(pred, alpha, gt, mask, report.ssim_w, report.mask_w,
                                        d_pred, d_alpha);
        report.l1 = pc.l1;
        report.ssim_term = pc.ssim_term;
        report.mask = pc.mask;
        report.light_reg = light_regularizer_grad(ld_img, ls_img, gt, d_ld_img, d_ls_img);
        for (double& v : d_ld_img.raw()) v *= report.light_w;
        for (double& v : d_ls_img.raw()) v *= report.light_w;
    } else {
        auto pc = photometric_loss(pred, alpha, gt, mask);
        report.l1 = pc.l1;
        report.ssim_term = pc.ssim_term;
        report.mask = pc.mask;
        report.light_reg = light_regularizer(ld_img, ls_img, gt);
    }

    // smoothness on a deterministic subset of Gaussian centers
    {
        Rng pick(config.rng_seed, stream_id(0x500071, uint64_t(iteration)));
        std::vector<Vec3> pts;
        const int count = std::min<int>(config.smoothness_points, int(n));
        pts.reserve(size_t(count));
        for (int i = 0; i < count; i++)
            pts.push_back(ctx.gaussians.points[pick.next_below(uint32_t(n))].position);
        Rng perturb(config.rng_seed, stream_id(0x9e407, uint64_t(iteration)));
        if (grad) {
            report.smoothness = params.field.smoothness_loss_grad(
                pts, config.smoothness_sigma, perturb, *grad, report.smooth_w);
        } else {
            report.smoothness = params.field.smoothness_loss(pts, config.smoothness_sigma, perturb);
        }
    }

    report.entropy = grid ? entropy_loss(*grid) : 0.0;
    report.finalize();
    if (!grad) return report;

    // pixels -> per-point payload gradients (weights are constants of the run)
    std::vector<Vec3> d_color(n, Vec3{0, 0, 0}), d_ld(n, Vec3{0, 0, 0}), d_ls(n, Vec3{0, 0, 0});
    composite_backprop(cache, d_pred, d_color);
    composite_backprop(cache, d_ld_img, d_ld);
    composite_backprop(cache, d_ls_img, d_ls);

    const size_t env_offset = params.field_count();
    const size_t sh_offset = env_offset + params.env_count();
    EnvTableGrad table_grad;
    Image d_radiance_direct;  // MC-stage direct taps
    if (config.optimize_environment) {
        if (warmup) table_grad.init(*env);
        else d_radiance_direct = Image(env->radiance.width(), env->radiance.height(), 3);
    }

    // deterministic serial scatter over points
    for (size_t k = 0; k < vis.size(); k++) {
        const uint32_t idx = vis[k];
        const Vec3 dc = d_color[idx], dl = d_ld[idx], dsps = d_ls[idx];
        double d_out[kMaterialChannels];  // d loss / d activated channel
        if (warmup) {
            const SplitSumShadeGrad& s = sg[k];
            for (int c = 0; c < 3; c++) d_out[c] = dc[c] * s.d_albedo[c];
            d_out[3] = dot(dc, s.d_roughness) + dot(dsps, s.d_spec_light_d_rough);
            d_out[4] = dot(dc, s.d_metalness);
            if (config.optimize_environment) table_grad.accumulate(s, dc, dl, dsps);
        } else {
            const RadianceEstimateGrad& m = mg[k];
            for (int c = 0; c < 3; c++) d_out[c] = dc[c] * m.d_albedo[c];
            d_out[3] = dot(dc, m.d_roughness) + dot(dsps, m.d_spec_light_d_rough);
            d_out[4] = dot(dc, m.d_metalness) + dot(dl, m.d_diffuse_light_d_metal);
            if (config.optimize_environment) {
                for (const auto& tap : m.env_taps) {
                    for (int c = 0; c < 3; c++)
                        d_radiance_direct.at(tap.y, tap.x, c) +=
                            tap.w * (dc[c] * tap.f_color[c] + dl[c] * tap.f_diff_light +
                                     dsps[c] * tap.f_spec_nf);
                }
            }
            if (config.optimize_indirect) {
                for (const auto& tap : m.sh_taps) {
                    for (int c = 0; c < 3; c++)
                        (*grad)[sh_offset + size_t(tap.index) * 3 + size_t(c)] +=
                            tap.clamp_mask[c] * tap.w *
                            (dc[c] * tap.f_color[c] + dl[c] * tap.f_diff_light +
                             dsps[c] * tap.f_spec_nf);
                }
            }
        }
        for (const auto& tap : fq[k].taps)
            for (int c = 0; c < kMaterialChannels; c++)
                (*grad)[tap.node_base + size_t(c)] +=
                    d_out[c] * fq[k].activation_slope[size_t(c)] * tap.weight;
    }

    if (config.optimize_environment) {
        Image d_radiance = warmup ? backprop_tables_to_radiance(*env, ctx.splitsum, table_grad)
                                  : std::move(d_radiance_direct);
        Image d_coarse(params.env_log.width(), params.env_log.height(), 3);
        upsample_latlong_adjoint(d_radiance, d_coarse);
        for (size_t i = 0; i < d_coarse.size(); i++)
            (*grad)[env_offset + i] +=
                d_coarse.raw()[i] * std::exp(params.env_log.raw()[i]);  // log-space chain
    }
    return report;
}

// ---------------------------------------------------------------------------
// Optimization loop
// ---------------------------------------------------------------------------

namespace {

void write_divergence_snapshot(const FitState& state, const LossReport& report,
                               const std::string& dir) {
    if (dir.empty()) return;
    try {
        std::filesystem::create_directories(dir);
        nlohmann::json j{
            {"iteration", state.iteration},
            {"stage", state.stage == FitStage::warmup_splitsum ? "warmup_splitsum" : "montecarlo"},
            {"loss",
             {{"l1", report.l1},
              {"ssim_term", report.ssim_term},
              {"mask", report.mask},
              {"smoothness", report.smoothness},
              {"light_reg", report.light_reg},
              {"total", report.total}}},
            {"loss_history", state.loss_history},
        };
        std::ofstream out(dir + "/divergence.json");
        out << j.dump(2) << "\n";
        save_fit_state(state, dir + "/divergence_state.bin");
    } catch (const std::exception&) {
        // snapshot writing must not mask the original failure
    }
}

}  // namespace

void fit_continue(const FitContext& ctx, FitState& state, const std::string& snapshot_dir,
                  const FitCallbacks& callbacks) {
    const RunConfig& config = state.config;
    if (ctx.views.size() < 1) throw std::invalid_argument("fit: no views");
    std::vector<double> grad;
    const size_t field_n = state.params.field_count();

    while (state.iteration < config.iterations) {
        const int it = state.iteration;
        state.stage = state.stage_at(it);
        LossReport report = evaluate_iteration(ctx, state.params, config, it, ctx.grid, &grad);
        if (!std::isfinite(report.total)) {
            write_divergence_snapshot(state, report, snapshot_dir);
            throw FitDivergence("fit: loss diverged at iteration " + std::to_string(it));
        }

        const double t = it + 1;
        const double b1 = config.adam_beta1, b2 = config.adam_beta2;
        const double corr1 = 1.0 - std::pow(b1, t), corr2 = 1.0 - std::pow(b2, t);
        for (size_t i = 0; i < grad.size(); i++) {
            const double g = grad[i];
            if (g == 0 && state.adam_m[i] == 0 && state.adam_v[i] == 0) continue;
            state.adam_m[i] = b1 * state.adam_m[i] + (1 - b1) * g;
            state.adam_v[i] = b2 * state.adam_v[i] + (1 - b2) * g * g;
            const double lr = i < field_n ? config.lr_material : config.lr_lighting;
            const double step = lr * (state.adam_m[i] / corr1) /
                                (std::sqrt(state.adam_v[i] / corr2) + 1e-8);
            state.params.add(i, -step);
        }
        if (!state.params.all_finite()) {
            write_divergence_snapshot(state, report, snapshot_dir);
            throw FitDivergence("fit: parameters diverged at iteration " + std::to_string(it));
        }
        state.loss_history.push_back(report.total);
        state.iteration = it + 1;
        if (callbacks.on_iteration) callbacks.on_iteration(state, report);
    }
}

FitState fit(const FitContext& ctx, const RunConfig& config, const std::string& snapshot_dir,
             const FitCallbacks& callbacks) {
    FitState state = make_initial_state(ctx, config);
    fit_continue(ctx, state, snapshot_dir, callbacks);
    return state;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const FitContext& ctx, const FitState& state, int probe_count,
                                   double epsilon) {
    GradientCheckReport report;
    epsilon = std::clamp(epsilon, 1e-5, 1e-2);

    // freeze the MC importance-sampling materials at the linearization point
    std::vector<MaterialSample> sampling(ctx.gaussians.size());
    for (size_t i = 0; i < ctx.gaussians.size(); i++)
        sampling[i] = state.params.field.query(ctx.gaussians.points[i].position);

    const auto& grid = ctx.grid;
    std::vector<double> grad;
    evaluate_iteration(ctx, state.params, state.config, state.iteration, grid, &grad, &sampling);

    std::vector<size_t> candidates;
    for (size_t i = 0; i < grad.size(); i++)
        if (grad[i] != 0) candidates.push_back(i);
    if (candidates.empty()) return report;

    Rng rng(state.config.rng_seed, 0x6ad17);
    FitParameters probe_params = state.params;
    std::vector<double> errors;
    for (int p = 0; p < probe_count; p++) {
        size_t i = candidates[rng.next_below(uint32_t(candidates.size()))];
        probe_params.add(i, epsilon);
        double up = evaluate_iteration(ctx, probe_params, state.config, state.iteration, grid,
                                       nullptr, &sampling)
                        .total;
        probe_params.add(i, -2 * epsilon);
        double down = evaluate_iteration(ctx, probe_params, state.config, state.iteration, grid,
                                         nullptr, &sampling)
                          .total;
        probe_params.add(i, epsilon);
        double fd = (up - down) / (2 * epsilon);
        double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-12});
        errors.push_back(std::abs(fd - grad[i]) / denom);
    }
    std::sort(errors.begin(), errors.end());
    report.probes = int(errors.size());
    report.relative_errors = errors;
    report.median_relative_error = errors[errors.size() / 2];
    report.max_relative_error = errors.back();
    report.pass = report.median_relative_error < 1e-3 && report.max_relative_error < 1e-2;
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

Image render_view(const FitContext& ctx, const FitParameters& params, const View& view,
                  const EnvironmentLight& env, LightingMode lighting, ShadingMode shading,
                  int mc_samples, bool occlusion_enabled, uint64_t seed, Image* alpha_out) {
    const size_t n = ctx.gaussians.size();
    TransportOptions topt;
    topt.samples = mc_samples;
    topt.occlusion_enabled = occlusion_enabled;
    topt.seed = seed;

    if (shading == ShadingMode::forward) {
        SplatCache cache = build_splat_cache(ctx.gaussians, view);
        const Vec3 cam = view.camera_position();
        std::vector<Vec3> color(n, Vec3{0, 0, 0});
        parallel_for(n, [&](size_t i) {
            const GaussianPoint& g = ctx.gaussians.points[i];
            MaterialSample mat = params.field.query(g.position);
            Vec3 wo = normalize(cam - g.position);
            if (lighting == LightingMode::split_sum) {
                color[i] = shade_splitsum(mat, g.normal, wo, env).color;
            } else {
                color[i] = estimate_radiance(g.position, g.normal, wo, mat, env, params.sh,
                                             &ctx.bvh, topt, stream_id(0xfe4de4, i))
                               .color;
            }
        });
        Image out = composite(cache, color);
        if (alpha_out) *alpha_out = cache.alpha;
        return out;
    }

    // deferred: rasterize attributes, shade per pixel
    GaussianSet set = ctx.gaussians;
    set.payload = PayloadKind::attributes;
    set.materials.resize(n);
    for (size_t i = 0; i < n; i++) set.materials[i] = params.field.query(set.points[i].position);
    GBuffer gb = rasterize_gbuffer(set, view);
    Image out(view.width, view.height, 3, 0.0);
    const Vec3 cam = view.camera_position();
    parallel_for(size_t(view.height), [&](size_t row) {
        const int y = int(row);
        for (int x = 0; x < view.width; x++) {
            const double a = gb.alpha.at(y, x);
            if (a <= 1e-4) continue;
            Vec3 pos = gb.position.pixel3(y, x);
            Vec3 nrm = gb.normal.pixel3(y, x);
            if (length(nrm) == 0) continue;
            nrm = normalize(nrm);
            MaterialSample mat(gb.albedo.pixel3(y, x), gb.roughness.at(y, x), gb.metalness.at(y, x));
            Vec3 wo = normalize(cam - pos);
            Vec3 c;
            if (lighting == LightingMode::split_sum) {
                c = shade_splitsum(mat, nrm, wo, env).color;
            } else {
                c = estimate_radiance(pos, nrm, wo, mat, env, params.sh, &ctx.bvh, topt,
                                      stream_id(0xdefe44ed, uint64_t(y) * 65536 + uint64_t(x)))
                        .color;
            }
            out.set_pixel3(y, x, c * a);  // premultiplied, matching forward output
        }
    });
    if (alpha_out) *alpha_out = gb.alpha;
    return out;
}

RenderModes render_modes(const FitContext& ctx, const FitState& state, const View& view,
                         const EnvironmentLight* relight_env) {
    const RunConfig& config = state.config;
    RenderModes out;

    EnvironmentLight fitted_env;
    const EnvironmentLight* env = &ctx.env;
    if (config.optimize_environment) {
        fitted_env = make_working_env(ctx, state.params, config,
                                      config.lighting_mode == LightingMode::split_sum);
        env = &fitted_env;
    }

    out.nvs = render_view(ctx, state.params, view, *env, config.lighting_mode,
                          config.shading_mode, config.mc_samples_final, config.occlusion_enabled,
                          config.rng_seed, &out.alpha);

    GaussianSet set = ctx.gaussians;
    set.payload = PayloadKind::attributes;
    set.materials.resize(set.size());
    for (size_t i = 0; i < set.size(); i++)
        set.materials[i] = state.params.field.query(set.points[i].position);
    GBuffer gb = rasterize_gbuffer(set, view);
    out.albedo = gb.albedo;
    out.roughness = gb.roughness;
    out.metalness = gb.metalness;
    out.normal = gb.normal;

    if (relight_env) {
        EnvironmentLight relight = *relight_env;
        if (config.lighting_mode == LightingMode::split_sum && !relight.tables_ready())
            precompute_splitsum(relight, ctx.splitsum);
        out.relit = render_view(ctx, state.params, view, relight, config.lighting_mode,
                                config.shading_mode, config.mc_samples_final,
                                config.occlusion_enabled, config.rng_seed, nullptr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

void save_fit_state(const FitState& state, const std::string& path) {
    std::vector<double> payload;
    const auto& fp = state.params.field.parameter_vector();
    payload.insert(payload.end(), fp.begin(), fp.end());
    payload.insert(payload.end(), state.params.env_log.raw().begin(),
                   state.params.env_log.raw().end());
    for (const auto& c : state.params.sh.coefficients) {
        payload.push_back(c.x);
        payload.push_back(c.y);
        payload.push_back(c.z);
    }
    payload.insert(payload.end(), state.adam_m.begin(), state.adam_m.end());
    payload.insert(payload.end(), state.adam_v.begin(), state.adam_v.end());

    nlohmann::json levels = nlohmann::json::array();
    for (int l = 0; l < state.params.field.level_count(); l++)
        levels.push_back(state.params.field.level_resolution(l));
    const Box3& b = state.params.field.bounds();
    nlohmann::json header{
        {"kind", "fit_state"},
        {"iteration", state.iteration},
        {"config", state.config.to_json()},
        {"field_levels", levels},
        {"field_bounds_lo", {b.lo.x, b.lo.y, b.lo.z}},
        {"field_bounds_hi", {b.hi.x, b.hi.y, b.hi.z}},
        {"env_size", {state.params.env_log.width(), state.params.env_log.height()}},
        {"sh_degree", state.params.sh.degree},
        {"loss_history", state.loss_history},
        {"dtype", "float64"},
    };
    save_blob(path, header, payload.data(), payload.size() * sizeof(double));
}

FitState load_fit_state(const std::string& path) {
    std::vector<unsigned char> bytes;
    nlohmann::json header = load_blob(path, bytes);
    if (header.value("kind", "") != "fit_state")
        throw std::runtime_error("not a fit_state blob: " + path);
    FitState state;
    state.config = RunConfig::from_json(header.at("config"));
    state.iteration = header.at("iteration");
    state.loss_history = header.at("loss_history").get<std::vector<double>>();

    Box3 b;
    auto lo = header.at("field_bounds_lo"), hi = header.at("field_bounds_hi");
    b.lo = {lo[0], lo[1], lo[2]};
    b.hi = {hi[0], hi[1], hi[2]};
    std::vector<int> levels;
    for (const auto& l : header.at("field_levels")) levels.push_back(l);
    state.params.field = MaterialField(b, levels);
    state.params.env_log = Image(header.at("env_size")[0], header.at("env_size")[1], 3);
    state.params.sh = IndirectLight(header.at("sh_degree"));
    state.stage = state.stage_at(state.iteration);

    const size_t total = state.params.size();
    if (bytes.size() != (total + 2 * total) * sizeof(double) &&
        bytes.size() != (total * 3) * sizeof(double))
        throw std::runtime_error("fit_state payload size mismatch: " + path);
    const double* p = reinterpret_cast<const double*>(bytes.data());
    std::memcpy(state.params.field.parameters(), p, state.params.field_count() * sizeof(double));
    p += state.params.field_count();
    std::memcpy(state.params.env_log.data(), p, state.params.env_count() * sizeof(double));
    p += state.params.env_count();
    for (auto& c : state.params.sh.coefficients) {
        c = {p[0], p[1], p[2]};
        p += 3;
    }
    state.adam_m.assign(p, p + total);
    p += total;
    state.adam_v.assign(p, p + total);
    return state;
}

}  // namespace geosplat
