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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geosplat/adapter.hpp"
#include "geosplat/bvh.hpp"
#include "geosplat/config.hpp"
#include "geosplat/losses.hpp"
#include "geosplat/material_field.hpp"
#include "geosplat/scene_io.hpp"
#include "geosplat/splat.hpp"
#include "geosplat/transport.hpp"

namespace geosplat {

enum class FitStage { warmup_splitsum, montecarlo };

/// Raised when the total loss turns non-finite; a diagnostic snapshot path is
/// included when one was written.
class FitDivergence : public std::runtime_error {
public:
    explicit FitDivergence(const std::string& what) : std::runtime_error(what) {}
};

/// Frozen per-run context: geometry, its Gaussians, per-view rasterization
/// weights and outgoing directions. Built once; the optimization never
/// changes geometry, so splat weights are constants of the run.
struct FitContext {
    Mesh mesh;
    Bvh bvh;
    GaussianSet gaussians;
    std::vector<View> views;
    std::vector<SplatCache> caches;              // per view
    std::vector<std::vector<uint32_t>> visible;  // per view: point indices with any weight
    std::vector<std::vector<Vec3>> wo;           // per view x point: unit direction to camera
    EnvironmentLight env;                        // scene light (tables ready)
    std::optional<ScalarGrid> grid;              // entropy term input (inert when absent)
    SplitSumParams splitsum;

    static FitContext prepare(const Scene& scene);
};

/// The optimizable parameters: material field raw values, log-radiance env
/// texels and SH coefficients, flattened as
/// [field | env (3 per texel) | sh (3 per coefficient)].
struct FitParameters {
    MaterialField field;
    Image env_log;      // env_fit_height*2 x env_fit_height x 3
    IndirectLight sh;

    size_t field_count() const { return field.parameter_count(); }
    size_t env_count() const { return env_log.size(); }
    size_t sh_count() const { return sh.coefficients.size() * 3; }
    size_t size() const { return field_count() + env_count() + sh_count(); }

    double get(size_t i) const;
    void add(size_t i, double delta);
    bool all_finite() const;
};

struct FitState {
    FitParameters params;
    RunConfig config;
    int iteration = 0;
    FitStage stage = FitStage::warmup_splitsum;
    std::vector<double> adam_m, adam_v;
    std::vector<double> loss_history;  // total loss per iteration

    FitStage stage_at(int it) const {
        return it < int(config.warmup_fraction * config.iterations) ? FitStage::warmup_splitsum
                                                                    : FitStage::montecarlo;
    }
};

/// Initial state for a context (field over the mesh bounds, env texels from
/// the scene light, zero SH).
FitState make_initial_state(const FitContext& ctx, const RunConfig& config);

/// One loss evaluation at a given iteration index (fixed RNG streams). When
/// `grad` is non-null it receives d total / d parameter. `sampling_override`
/// freezes the MC importance-sampling materials (used by the finite
/// difference probes; pass the per-point materials of the linearization
/// point).
LossReport evaluate_iteration(const FitContext& ctx, const FitParameters& params,
                              const RunConfig& config, int iteration,
                              const std::optional<ScalarGrid>& grid, std::vector<double>* grad,
                              const std::vector<MaterialSample>* sampling_override = nullptr);

/// Runs `config.iterations` adaptive-moment steps (round-robin over views).
/// Deterministic for a fixed config and seed. Throws FitDivergence when the
/// loss turns NaN (after writing a diagnostic snapshot next to
/// `snapshot_dir` when provided).
struct FitCallbacks {
    std::function<void(const FitState&, const LossReport&)> on_iteration;
};
FitState fit(const FitContext& ctx, const RunConfig& config, const std::string& snapshot_dir = "",
             const FitCallbacks& callbacks = {});
/// Continues a previous run in place (resume support).
void fit_continue(const FitContext& ctx, FitState& state, const std::string& snapshot_dir = "",
                  const FitCallbacks& callbacks = {});

/// Central-difference verification of the analytic gradient at the state's
/// current iteration. Probes are drawn among parameters with nonzero
/// analytic gradient; MC sampling distributions are frozen at the state.
struct GradientCheckReport {
    int probes = 0;
    double median_relative_error = 0;
    double max_relative_error = 0;
    bool pass = false;  // median < 1e-3 and max < 1e-2
    std::vector<double> relative_errors;
};
GradientCheckReport gradient_check(const FitContext& ctx, const FitState& state, int probe_count,
                                   double epsilon);

/// Final deliverable renders for one view.
struct RenderModes {
    Image nvs;        // premultiplied color
    Image alpha;
    Image albedo;     // G-buffer attribute maps (alpha-normalized)
    Image roughness;
    Image metalness;
    Image normal;
    Image relit;      // only when relight_env provided
};
RenderModes render_modes(const FitContext& ctx, const FitState& state, const View& view,
                         const EnvironmentLight* relight_env = nullptr);

/// Shades the context's Gaussians with the state's materials and the given
/// light, composited through a fresh cache for `view`. Used by render_modes
/// and the split-sum vs Monte Carlo comparisons.
Image render_view(const FitContext& ctx, const FitParameters& params, const View& view,
                  const EnvironmentLight& env, LightingMode lighting, ShadingMode shading,
                  int mc_samples, bool occlusion_enabled, uint64_t seed, Image* alpha_out = nullptr);

// Checkpoints ------------------------------------------------------------------

void save_fit_state(const FitState& state, const std::string& path);
FitState load_fit_state(const std::string& path);

}  // namespace geosplat
