/*
 * Copyright (C) 2026 The Transluce Authors
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

#include <string>
#include <vector>

#include "transluce/direct.hpp"
#include "transluce/volume.hpp"

namespace transluce {

/// Per-term loss weights; depth carries extra weight by default.
struct LossWeights {
    double w_D = 5.0;
    double w_N = 1.0;
    double w_R = 1.0;
    double w_sh = 1.0;
    double w_i = 1.0;
    double w_sigma_t = 1.0;
    double w_alpha = 1.0;
    double w_g = 1.0;
    double w_If = 1.0;
    double w_alter = 1.0;
};

/// Mean absolute difference over mask=1 pixels (all channels). A null mask
/// means every pixel counts.
double l1_image(const Image& a, const Image& b, const Image* mask = nullptr);

/// Mean squared difference of two equal-length vectors.
double l2_vec(const std::vector<double>& a, const std::vector<double>& b);

/// One side of the full supervision loss: rasters plus scene parameters.
/// Parameter losses are computed on normalized [-1,1] values (the images
/// stay in physical radiometric units).
struct SceneEval {
    Image depth;
    Image normal;
    Image rough;
    Image flash_image;
    std::vector<Image> alter_images;
    Sh3x9 sh{};
    double flash_intensity = 0.0;
    SssParams sss;
};

struct LossBreakdown {
    double depth = 0.0, normal = 0.0, rough = 0.0;
    double sh = 0.0, flash = 0.0;
    double sigma_t = 0.0, alpha = 0.0, g = 0.0;
    double flash_image = 0.0, alter = 0.0;
    double total = 0.0;
};

/// Weighted sum of L1 raster terms {D, N, R, I_f, alter} and L2 parameter
/// terms {sh, i, sigma_t, alpha, g}. The breakdown entries carry their
/// weights and sum exactly to total.
LossBreakdown total_loss(const SceneEval& pred, const SceneEval& gt, const LossWeights& w,
                         const Image* mask = nullptr, const ParamRanges& ranges = {});

/// Adam with the repo's defaults and a constant-then-linear-decay schedule
/// over the second half of the run.
struct OptimConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int steps = 1000;
    uint64_t init_seed = 0;

    void validate() const {
        if (!(lr > 0.0) && steps > 0) throw InvalidArgumentError("OptimConfig: lr must be > 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
            throw InvalidArgumentError("OptimConfig: betas must lie in [0,1)");
        if (steps < 0) throw InvalidArgumentError("OptimConfig: steps must be >= 0");
    }

    double lr_at(int step) const {
        int half = steps / 2;
        if (step < half || steps == half) return lr;
        return lr * (1.0 - double(step - half) / double(steps - half));
    }
};

struct AdamState {
    std::vector<double> m, v;
    int t = 0;

    void init(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        t = 0;
    }
};

/// One Adam update in place; entries with update_mask = 0 are frozen.
/// Parameters are clamped to [-1, 1] afterwards.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const OptimConfig& cfg, const std::vector<uint8_t>* update_mask = nullptr);

/// Table 1-style MAE report: per parameter group, the mean and standard
/// deviation of per-scene mean absolute error, in physical units and in
/// normalized units.
struct MaeRow {
    std::string group;
    double mean_physical = 0.0, std_physical = 0.0;
    double mean_normalized = 0.0, std_normalized = 0.0;
};

struct MaeReport {
    std::vector<MaeRow> rows;  // order: N, D, R, sh, i, sigma_t, alpha, g
};

MaeReport mae_report(const std::vector<SceneEval>& preds, const std::vector<SceneEval>& gts,
                     const Image* mask = nullptr, const ParamRanges& ranges = {});

std::string mae_report_text(const MaeReport& report);

struct FitReport {
    std::vector<double> loss_trace;  // length steps+1
    ParamVector final_params;        // best-so-far, normalized
    double initial_loss = 0.0;
    double best_loss = 0.0;
    double wall_clock_sec = 0.0;
    int renders_used = 0;
    bool diverged = false;
    std::vector<std::pair<std::string, double>> param_mae;  // vs GT when known

    std::string to_json() const;
    void write_csv_trace(const std::string& path) const;
};

/// Analysis-by-synthesis through the direct renderer: Adam on normalized
/// {roughness raster, sh, flash intensity} against an observed flash image.
/// Geometry (depth, normals) stays fixed unless refine_normals is set.
struct FitDirectInput {
    Image observed;    // 3ch flash image
    Image mask;        // 1ch
    GBuffer geometry;  // depth/normal fixed; rough provides the init
    Camera camera;
};

struct FitDirectOptions {
    OptimConfig optim;
    ParamRanges ranges;
    enum class Init { Midpoint, Random, Provided } init = Init::Midpoint;
    ParamVector provided_init;
    bool refine_normals = false;
    int threads = 1;
    const SceneEval* gt = nullptr;  // optional, for the report's MAE block
};

FitReport fit_direct(const FitDirectInput& input, const FitDirectOptions& options);

/// Analysis-by-synthesis through the volumetric tracer: Adam on normalized
/// {sigma_t, alpha, g, i} with common-random-number central finite
/// differences at coarse resolution. Geometry and roughness are known.
struct FitSssInput {
    Image observed_flash;
    Image observed_noflash;  // empty disables the no-flash term (one-shot)
    Image mask;              // empty = unmasked loss
    VolumeScene scene;       // geometry/rough/env/camera; sss+flash seeded from init
    double noflash_jitter_deg = 0.0;
};

struct FitSssOptions {
    OptimConfig optim;
    ParamRanges ranges;
    double fd_step = 5e-3;   // normalized space; must be >= 1e-4
    int coarse_res = 64;
    int spp = 256;           // loss-trace render quality
    int fd_spp = 64;         // probe render quality (common random numbers)
    enum class Init { Midpoint, Random, Provided } init = Init::Midpoint;
    SssParams provided_sss;
    double provided_flash = 55.0;
    bool fit_flash_intensity = true;
    bool fit_g = true;
    int threads = 1;
};

FitReport fit_sss(const FitSssInput& input, const FitSssOptions& options);

}  // namespace transluce
