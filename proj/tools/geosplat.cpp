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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "geosplat/adapter.hpp"
#include "geosplat/fit.hpp"
#include "geosplat/gaussians.hpp"
#include "geosplat/metrics.hpp"
#include "geosplat/parallel.hpp"
#include "geosplat/scene_io.hpp"
#include "geosplat/selftest.hpp"
#include "geosplat/splat.hpp"
#include "geosplat/transport.hpp"

namespace fs = std::filesystem;
using namespace geosplat;
using nlohmann::json;

namespace {

// line-delimited JSON logging
void log_event(const json& j) { std::cout << j.dump() << "\n" << std::flush; }

struct CommonArgs {
    std::string scene_path;
    std::string config_path;
    std::string out_dir;
    int64_t seed = -1;  // -1: keep the scene value
    int threads = 0;
    std::string mode;      // splitsum | mc
    std::string shading;   // forward | deferred
    int spp = 0;
    int mc_samples = 0;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool needs_scene = true) {
    if (needs_scene)
        cmd->add_option("--scene", args.scene_path, "scene JSON document")->required();
    cmd->add_option("--config", args.config_path, "run config JSON (overrides the scene's)");
    cmd->add_option("--out", args.out_dir, "output run directory")->required();
    cmd->add_option("--seed", args.seed, "RNG seed override");
    cmd->add_option("--threads", args.threads, "worker threads (0 = auto, or GEOSPLAT_THREADS)");
    cmd->add_option("--mode", args.mode, "lighting mode: splitsum | mc")
        ->check(CLI::IsMember({"splitsum", "mc"}));
    cmd->add_option("--shading", args.shading, "shading mode: forward | deferred")
        ->check(CLI::IsMember({"forward", "deferred"}));
    cmd->add_option("--spp", args.spp, "samples per pixel override");
    cmd->add_option("--mc-samples", args.mc_samples, "Monte Carlo samples override");
}

Scene load_scene_with_overrides(const CommonArgs& args) {
    Scene scene = load_scene(args.scene_path);
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw IoError("cannot open: " + args.config_path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw IoError("malformed config JSON: " + args.config_path);
        scene.config = RunConfig::from_json(j);
    }
    if (args.seed >= 0) scene.config.rng_seed = uint64_t(args.seed);
    if (!args.mode.empty()) scene.config.lighting_mode = lighting_mode_from_string(args.mode);
    if (!args.shading.empty()) scene.config.shading_mode = shading_mode_from_string(args.shading);
    if (args.spp > 0) scene.config.samples_per_pixel = args.spp;
    if (args.mc_samples > 0) {
        scene.config.mc_samples = args.mc_samples;
        scene.config.mc_samples_final = args.mc_samples;
    }
    scene.config.validate();
    if (args.threads != 0) set_thread_count(args.threads);
    log_event({{"event", "config"},
               {"scene", args.scene_path},
               {"seed", scene.config.rng_seed},
               {"threads", thread_count()},
               {"config", scene.config.to_json()}});
    return scene;
}

void write_manifest(const std::string& dir, const json& inputs, const json& outputs,
                    const RunConfig& config) {
    json manifest{{"inputs", inputs}, {"outputs", outputs}, {"config", config.to_json()},
                  {"seed", config.rng_seed}};
    std::ofstream out(dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

std::string put_image(const std::string& dir, const std::string& name, const Image& img,
                      json& outputs, bool also_png = true) {
    std::string exr = dir + "/" + name + ".exr";
    if (img.channels() == 3) {
        write_exr(img, exr);
        outputs.push_back(name + ".exr");
    }
    if (also_png) {
        std::string png = dir + "/" + name + ".png";
        write_png(img, png);
        outputs.push_back(name + ".png");
    }
    return exr;
}

int cmd_render(const CommonArgs& args) {
    Scene scene = load_scene_with_overrides(args);
    fs::create_directories(args.out_dir);
    FitContext ctx = FitContext::prepare(scene);
    FitState state = make_initial_state(ctx, scene.config);
    json outputs = json::array();
    for (size_t v = 0; v < ctx.views.size(); v++) {
        RenderModes rm = render_modes(ctx, state, ctx.views[v]);
        std::string tag = "view" + std::to_string(v);
        put_image(args.out_dir, tag + "_nvs", rm.nvs, outputs);
        put_image(args.out_dir, tag + "_albedo", rm.albedo, outputs);
        put_image(args.out_dir, tag + "_normal", rm.normal, outputs, false);
        write_png(rm.alpha, args.out_dir + "/" + tag + "_alpha.png");
        outputs.push_back(tag + "_alpha.png");
        log_event({{"event", "rendered"}, {"view", v}});
    }
    write_manifest(args.out_dir, {{"scene", args.scene_path}}, outputs, scene.config);
    return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& resume_path) {
    Scene scene = load_scene_with_overrides(args);
    fs::create_directories(args.out_dir);
    FitContext ctx = FitContext::prepare(scene);

    FitState state = resume_path.empty() ? make_initial_state(ctx, scene.config)
                                         : load_fit_state(resume_path);
    std::ofstream loss_csv(args.out_dir + "/loss.csv",
                           resume_path.empty() ? std::ios::trunc : std::ios::app);
    if (resume_path.empty())
        loss_csv << "iteration,stage,total,l1,ssim,mask,entropy,smoothness,light\n";

    FitCallbacks callbacks;
    callbacks.on_iteration = [&](const FitState& s, const LossReport& r) {
        loss_csv << s.iteration - 1 << ","
                 << (s.stage == FitStage::warmup_splitsum ? "warmup" : "mc") << "," << r.total
                 << "," << r.l1 << "," << r.ssim_term << "," << r.mask << "," << r.entropy << ","
                 << r.smoothness << "," << r.light_reg << "\n";
        if ((s.iteration - 1) % 50 == 0)
            log_event({{"event", "iteration"},
                       {"iteration", s.iteration - 1},
                       {"stage", s.stage == FitStage::warmup_splitsum ? "warmup" : "mc"},
                       {"total_loss", r.total}});
    };
    fit_continue(ctx, state, args.out_dir, callbacks);
    loss_csv.close();

    json outputs = json::array();
    save_fit_state(state, args.out_dir + "/checkpoint.bin");
    outputs.push_back("checkpoint.bin");
    outputs.push_back("loss.csv");
    for (size_t v = 0; v < std::min<size_t>(ctx.views.size(), 4); v++) {
        RenderModes rm = render_modes(ctx, state, ctx.views[v]);
        std::string tag = "view" + std::to_string(v);
        put_image(args.out_dir, tag + "_nvs", rm.nvs, outputs);
        put_image(args.out_dir, tag + "_albedo", rm.albedo, outputs);
        write_png(rm.roughness, args.out_dir + "/" + tag + "_roughness.png");
        outputs.push_back(tag + "_roughness.png");
        put_image(args.out_dir, tag + "_normal", rm.normal, outputs, false);
    }
    write_manifest(args.out_dir, {{"scene", args.scene_path}, {"resume", resume_path}}, outputs,
                   scene.config);
    log_event({{"event", "fit_done"},
               {"iterations", state.iteration},
               {"final_loss", state.loss_history.empty() ? 0.0 : state.loss_history.back()}});
    return 0;
}

int cmd_precompute_env(const CommonArgs& args, const std::string& env_path) {
    if (args.threads != 0) set_thread_count(args.threads);
    fs::create_directories(args.out_dir);
    EnvironmentLight env = load_envmap(env_path);
    SplitSumParams params;
    uint64_t key = splitsum_cache_key(env, params);
    std::string cache_path =
        args.out_dir + "/" + fs::path(env_path).stem().string() + ".splitsum.bin";
    if (load_splitsum_cache(env, params, cache_path)) {
        log_event({{"event", "cache_hit"}, {"path", cache_path}, {"key", key}});
        return 0;
    }
    precompute_splitsum(env, params);
    save_splitsum_cache(env, params, cache_path);
    write_manifest(args.out_dir, {{"envmap", env_path}},
                   json::array({fs::path(cache_path).filename().string()}), RunConfig{});
    log_event({{"event", "precomputed"}, {"path", cache_path}, {"key", key}});
    return 0;
}

int cmd_adapter(const CommonArgs& args, const std::string& mesh_path, const std::string& mode) {
    if (args.threads != 0) set_thread_count(args.threads);
    fs::create_directories(args.out_dir);
    MeshLoadReport report;
    Mesh mesh = load_mesh(mesh_path, &report);
    RunConfig config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw IoError("cannot open: " + args.config_path);
        config = RunConfig::from_json(json::parse(in));
    }
    if (args.seed >= 0) config.rng_seed = uint64_t(args.seed);
    GaussianSet set =
        adapt(mesh, mode == "vertex" ? AdapterMode::vertex : AdapterMode::face, config.adapter);
    std::string out_path = args.out_dir + "/gaussians.bin";
    save_gaussians(set, out_path);
    write_manifest(args.out_dir, {{"mesh", mesh_path}, {"mode", mode}},
                   json::array({"gaussians.bin"}), config);
    log_event({{"event", "adapted"},
               {"faces", mesh.face_count()},
               {"points", set.size()},
               {"degenerate_faces_dropped", report.degenerate_faces_dropped},
               {"manifold", report.manifold}});
    return 0;
}

int cmd_check_consistency(const CommonArgs& args) {
    Scene scene = load_scene_with_overrides(args);
    fs::create_directories(args.out_dir);
    Bvh bvh(scene.mesh);
    GaussianSet set = adapt(scene.mesh, AdapterMode::face, scene.config.adapter);
    ShapeConsistency sc = shape_consistency(bvh, set, scene.views);
    json report{{"reflection_mae_deg", sc.reflection_mae_deg},
                {"transfer_distance", sc.transfer_distance},
                {"coverage", sc.coverage},
                {"valid", sc.valid}};
    std::ofstream out(args.out_dir + "/consistency.json");
    out << report.dump(2) << "\n";
    write_manifest(args.out_dir, {{"scene", args.scene_path}},
                   json::array({"consistency.json"}), scene.config);
    log_event({{"event", "consistency"}, {"report", report}});
    return 0;
}

int cmd_trace_occlusion(const CommonArgs& args, int view_index, int samples) {
    Scene scene = load_scene_with_overrides(args);
    fs::create_directories(args.out_dir);
    if (view_index < 0 || size_t(view_index) >= scene.views.size())
        throw std::invalid_argument("trace-occlusion: view index out of range");
    const View& view = scene.views[size_t(view_index)];
    Bvh bvh(scene.mesh);
    RaycastResult rc = raycast_view(bvh, view);
    Image occ(view.width, view.height, 1, 0.0);
    parallel_for(size_t(view.height), [&](size_t row) {
        int y = int(row);
        for (int x = 0; x < view.width; x++) {
            if (rc.hit_mask.at(y, x) == 0) continue;
            Vec3 p = rc.position.pixel3(y, x);
            Vec3 n = rc.normal.pixel3(y, x);
            Rng rng(scene.config.rng_seed, stream_id(uint64_t(y), uint64_t(x)));
            int blocked = 0;
            for (int s = 0; s < samples; s++) {
                Vec2 u = rng.next_vec2();
                DirectionSample ds = sample_cosine(n, u.x, u.y);
                if (occlusion(bvh, p, ds.direction, n)) blocked++;
            }
            occ.at(y, x) = double(blocked) / samples;
        }
    });
    write_png(occ, args.out_dir + "/occlusion.png");
    write_manifest(args.out_dir, {{"scene", args.scene_path}, {"view", view_index}},
                   json::array({"occlusion.png"}), scene.config);
    log_event({{"event", "occlusion_traced"}, {"view", view_index}, {"samples", samples}});
    return 0;
}

int cmd_metrics(const CommonArgs& args, const std::string& pred_path, const std::string& gt_path,
                const std::string& mask_path) {
    if (args.threads != 0) set_thread_count(args.threads);
    fs::create_directories(args.out_dir);
    Image pred = load_target_image(pred_path);
    Image gt = load_target_image(gt_path);
    json report{{"psnr", psnr(pred, gt)}, {"ssim", ssim(pred, gt)}};
    if (!mask_path.empty()) {
        Image mask = load_mask(mask_path);
        report["normal_mae_deg"] = normal_mae_degrees(pred, gt, mask);
    }
    // +inf is not representable in strict JSON; report a sentinel
    if (psnr(pred, gt) == kInf) report["psnr"] = "inf";
    std::ofstream out(args.out_dir + "/metrics.json");
    out << report.dump(2) << "\n";
    write_manifest(args.out_dir, {{"pred", pred_path}, {"gt", gt_path}, {"mask", mask_path}},
                   json::array({"metrics.json"}), RunConfig{});
    log_event({{"event", "metrics"}, {"report", report}});
    return 0;
}

int cmd_selftest(const std::string& out_dir, int threads) {
    if (threads != 0) set_thread_count(threads);
    std::printf("%-4s %-55s %-6s %-9s %s\n", "#", "criterion", "state", "time", "detail");
    int failures = 0;
    auto results = selftest::run_all([&](const selftest::Criterion& c) {
        std::printf("%-4d %-55s %-6s %7.2fs  %s\n", c.id, c.name.c_str(),
                    c.pass ? "PASS" : "FAIL", c.seconds, c.detail.c_str());
        std::fflush(stdout);
        if (!c.pass) failures++;
    });
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        json j = json::array();
        for (const auto& c : results)
            j.push_back({{"id", c.id},
                         {"name", c.name},
                         {"pass", c.pass},
                         {"detail", c.detail},
                         {"seconds", c.seconds}});
        std::ofstream out(out_dir + "/selftest.json");
        out << j.dump(2) << "\n";
    }
    std::printf("%d/%zu criteria passed\n", int(results.size()) - failures, results.size());
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geosplat: mesh-grounded Gaussian splatting and PBR inverse rendering"};
    app.require_subcommand(1);

    CommonArgs render_args, fit_args, env_args, adapter_args, consistency_args, occ_args,
        metrics_args;
    std::string resume_path, env_path, mesh_path, adapter_mode = "face";
    std::string pred_path, gt_path, mask_path, selftest_out;
    int occ_view = 0, occ_samples = 64, selftest_threads = 0;

    auto* render = app.add_subcommand("render", "render a scene (images + manifest)");
    add_common_flags(render, render_args);

    auto* fitc = app.add_subcommand("fit", "recover materials/lighting from posed images");
    add_common_flags(fitc, fit_args);
    fitc->add_option("--resume", resume_path, "checkpoint to continue from");

    auto* penv = app.add_subcommand("precompute-env", "build and cache split-sum tables");
    penv->add_option("--env", env_path, "environment map (.hdr/.pfm)")->required();
    penv->add_option("--out", env_args.out_dir, "output directory")->required();
    penv->add_option("--threads", env_args.threads, "worker threads");

    auto* adapterc = app.add_subcommand("adapter", "dump the Gaussian table of a mesh");
    adapterc->add_option("--mesh", mesh_path, "OBJ mesh")->required();
    adapterc->add_option("--out", adapter_args.out_dir, "output directory")->required();
    adapterc->add_option("--mode", adapter_mode, "face | vertex")
        ->check(CLI::IsMember({"face", "vertex"}));
    adapterc->add_option("--config", adapter_args.config_path, "run config JSON");
    adapterc->add_option("--seed", adapter_args.seed, "RNG seed override");
    adapterc->add_option("--threads", adapter_args.threads, "worker threads");

    auto* consistency = app.add_subcommand("check-consistency",
                                           "splat-vs-mesh shape consistency report");
    add_common_flags(consistency, consistency_args);

    auto* occ = app.add_subcommand("trace-occlusion", "per-pixel hemisphere occlusion map");
    add_common_flags(occ, occ_args);
    occ->add_option("--view", occ_view, "view index");
    occ->add_option("--samples", occ_samples, "hemisphere samples per pixel");

    auto* metricsc = app.add_subcommand("metrics", "score an image pair");
    metricsc->add_option("--pred", pred_path, "predicted image")->required();
    metricsc->add_option("--gt", gt_path, "reference image")->required();
    metricsc->add_option("--mask", mask_path, "mask for normal MAE");
    metricsc->add_option("--out", metrics_args.out_dir, "output directory")->required();
    metricsc->add_option("--threads", metrics_args.threads, "worker threads");

    auto* selftestc = app.add_subcommand("selftest", "run the acceptance suite");
    selftestc->add_option("--out", selftest_out, "directory for the JSON report");
    selftestc->add_option("--threads", selftest_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (render->parsed()) return cmd_render(render_args);
        if (fitc->parsed()) return cmd_fit(fit_args, resume_path);
        if (penv->parsed()) return cmd_precompute_env(env_args, env_path);
        if (adapterc->parsed()) return cmd_adapter(adapter_args, mesh_path, adapter_mode);
        if (consistency->parsed()) return cmd_check_consistency(consistency_args);
        if (occ->parsed()) return cmd_trace_occlusion(occ_args, occ_view, occ_samples);
        if (metricsc->parsed()) return cmd_metrics(metrics_args, pred_path, gt_path, mask_path);
        if (selftestc->parsed()) return cmd_selftest(selftest_out, selftest_threads);
    } catch (const IoError& e) {
        log_event({{"event", "error"}, {"kind", "user"}, {"message", e.what()}});
        return 1;
    } catch (const std::invalid_argument& e) {
        log_event({{"event", "error"}, {"kind", "user"}, {"message", e.what()}});
        return 1;
    } catch (const std::exception& e) {
        log_event({{"event", "error"}, {"kind", "internal"}, {"message", e.what()}});
        return 2;
    }
    return 0;
}
