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

#include "transluce.h"

#include <cstring>
#include <fstream>
#include <string>

#include "transluce/direct.hpp"
#include "transluce/invert.hpp"
#include "transluce/io.hpp"
#include "transluce/parallel.hpp"
#include "transluce/scene_json.hpp"
#include "transluce/synth.hpp"

#include "json.hpp"

using nlohmann::json;
using namespace transluce;

struct tl_context {
    int threads = default_thread_count();
    uint64_t seed = 0;
    std::string last_error;
};

struct tl_scene {
    SceneDocument doc;
};

struct tl_image {
    Image image;
};

namespace {

tl_status record_error(tl_context* ctx, tl_status code, const char* what) {
    if (ctx) ctx->last_error = what ? what : "unknown error";
    return code;
}

tl_status classify(tl_context* ctx, const std::exception& e) {
    const char* what = e.what();
    if (dynamic_cast<const SchemaError*>(&e)) return record_error(ctx, TL_ERR_SCHEMA, what);
    if (dynamic_cast<const MissingFileError*>(&e)) return record_error(ctx, TL_ERR_IO, what);
    if (dynamic_cast<const IoError*>(&e)) return record_error(ctx, TL_ERR_IO, what);
    if (dynamic_cast<const DivergenceDetectedError*>(&e))
        return record_error(ctx, TL_ERR_DIVERGED, what);
    if (dynamic_cast<const InvalidArgumentError*>(&e))
        return record_error(ctx, TL_ERR_INVALID_ARGUMENT, what);
    if (dynamic_cast<const Error*>(&e)) return record_error(ctx, TL_ERR_RUNTIME, what);
    return record_error(ctx, TL_ERR_RUNTIME, what);
}

#define TL_GUARD_BEGIN       \
    if (ctx) ctx->last_error.clear(); \
    try {

#define TL_GUARD_END(ctx)                                 \
    }                                                     \
    catch (const std::exception& e) {                     \
        return classify(ctx, e);                          \
    }                                                     \
    catch (...) {                                         \
        return record_error(ctx, TL_ERR_RUNTIME, "unknown failure"); \
    }                                                     \
    return TL_OK;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

tl_image* wrap_image(Image img) {
    tl_image* out = new tl_image;
    out->image = std::move(img);
    return out;
}

void require(bool ok, const char* message) {
    if (!ok) throw InvalidArgumentError(message);
}

}  // namespace

extern "C" {

const char* tl_version(void) { return "0.1.0"; }

tl_context* tl_context_create(void) { return new tl_context; }

void tl_context_destroy(tl_context* ctx) { delete ctx; }

void tl_context_set_threads(tl_context* ctx, int threads) {
    if (ctx && threads >= 1) ctx->threads = threads;
}

int tl_context_threads(const tl_context* ctx) { return ctx ? ctx->threads : 1; }

void tl_context_set_seed(tl_context* ctx, uint64_t seed) {
    if (ctx) ctx->seed = seed;
}

uint64_t tl_context_seed(const tl_context* ctx) { return ctx ? ctx->seed : 0; }

const char* tl_last_error(const tl_context* ctx) {
    return ctx ? ctx->last_error.c_str() : "null context";
}

void tl_string_free(char* s) { delete[] s; }

/* ------------------------------------------------------------------ */

tl_status tl_image_create(tl_context* ctx, int width, int height, int channels, tl_image** out) {
    TL_GUARD_BEGIN
    require(out != nullptr, "tl_image_create: null out");
    *out = wrap_image(Image(width, height, channels));
    TL_GUARD_END(ctx)
}

void tl_image_destroy(tl_image* img) { delete img; }

int tl_image_width(const tl_image* img) { return img ? img->image.width : 0; }
int tl_image_height(const tl_image* img) { return img ? img->image.height : 0; }
int tl_image_channels(const tl_image* img) { return img ? img->image.channels : 0; }

float* tl_image_data(tl_image* img) { return img ? img->image.data.data() : nullptr; }
const float* tl_image_data_const(const tl_image* img) {
    return img ? img->image.data.data() : nullptr;
}

tl_status tl_image_read_pfm(tl_context* ctx, const char* path, tl_image** out) {
    TL_GUARD_BEGIN
    require(path && out, "tl_image_read_pfm: null argument");
    *out = wrap_image(read_pfm(path));
    TL_GUARD_END(ctx)
}

tl_status tl_image_write_pfm(tl_context* ctx, const tl_image* img, const char* path) {
    TL_GUARD_BEGIN
    require(img && path, "tl_image_write_pfm: null argument");
    write_pfm(img->image, path);
    TL_GUARD_END(ctx)
}

tl_status tl_image_read_png(tl_context* ctx, const char* path, tl_image** out) {
    TL_GUARD_BEGIN
    require(path && out, "tl_image_read_png: null argument");
    *out = wrap_image(read_png(path));
    TL_GUARD_END(ctx)
}

tl_status tl_image_write_png(tl_context* ctx, const tl_image* img, const char* path) {
    TL_GUARD_BEGIN
    require(img && path, "tl_image_write_png: null argument");
    write_png(img->image, path);
    TL_GUARD_END(ctx)
}

tl_status tl_image_write_preview_png(tl_context* ctx, const tl_image* img, const char* path) {
    TL_GUARD_BEGIN
    require(img && path, "tl_image_write_preview_png: null argument");
    write_png(tonemap_preview(img->image), path);
    TL_GUARD_END(ctx)
}

/* ------------------------------------------------------------------ */

tl_status tl_scene_load(tl_context* ctx, const char* path, tl_scene** out) {
    TL_GUARD_BEGIN
    require(path && out, "tl_scene_load: null argument");
    auto* s = new tl_scene{load_scene_json(path)};
    *out = s;
    TL_GUARD_END(ctx)
}

tl_status tl_scene_parse(tl_context* ctx, const char* json_text, tl_scene** out) {
    TL_GUARD_BEGIN
    require(json_text && out, "tl_scene_parse: null argument");
    auto* s = new tl_scene{parse_scene_json(json_text)};
    *out = s;
    TL_GUARD_END(ctx)
}

tl_status tl_scene_sample(tl_context* ctx, uint64_t seed, tl_scene** out) {
    TL_GUARD_BEGIN
    require(out != nullptr, "tl_scene_sample: null out");
    SceneDocument doc;
    doc.spec = sample_scene(seed);
    *out = new tl_scene{std::move(doc)};
    TL_GUARD_END(ctx)
}

void tl_scene_destroy(tl_scene* scene) { delete scene; }

tl_status tl_scene_save(tl_context* ctx, const tl_scene* scene, const char* path) {
    TL_GUARD_BEGIN
    require(scene && path, "tl_scene_save: null argument");
    save_scene_json(scene->doc, path);
    TL_GUARD_END(ctx)
}

tl_status tl_scene_to_json(tl_context* ctx, const tl_scene* scene, char** out) {
    TL_GUARD_BEGIN
    require(scene && out, "tl_scene_to_json: null argument");
    *out = dup_string(scene_json_text(scene->doc));
    TL_GUARD_END(ctx)
}

tl_status tl_scene_set(tl_context* ctx, tl_scene* scene, const char* assignment) {
    TL_GUARD_BEGIN
    require(scene && assignment, "tl_scene_set: null argument");
    apply_scene_edit(scene->doc, assignment);
    TL_GUARD_END(ctx)
}

tl_status tl_scene_lerp_sss(tl_context* ctx, tl_scene* scene, const tl_scene* other, double t) {
    TL_GUARD_BEGIN
    require(scene && other, "tl_scene_lerp_sss: null argument");
    scene->doc.spec.sss = lerp_sss(scene->doc.spec.sss, other->doc.spec.sss, t);
    TL_GUARD_END(ctx)
}

tl_status tl_scene_set_resolution(tl_context* ctx, tl_scene* scene, int width, int height) {
    TL_GUARD_BEGIN
    require(scene, "tl_scene_set_resolution: null scene");
    require(width >= 1 && height >= 1, "tl_scene_set_resolution: bad resolution");
    scene->doc.spec.camera.width = width;
    scene->doc.spec.camera.height = height;
    TL_GUARD_END(ctx)
}

/* ------------------------------------------------------------------ */

tl_status tl_render_direct(tl_context* ctx, const tl_scene* scene, tl_image** out) {
    TL_GUARD_BEGIN
    require(scene && out, "tl_render_direct: null argument");
    VolumeScene vs = build_volume_scene(scene->doc.spec);
    GBuffer g = rasterize_gbuffer(vs, scene->doc.spec.camera);
    Illumination illum;
    illum.sh = document_sh(scene->doc, ctx->threads);
    illum.flash_intensity = scene->doc.spec.flash_radiance;
    *out = wrap_image(render_direct(g, illum, scene->doc.spec.camera, ctx->threads));
    TL_GUARD_END(ctx)
}

tl_status tl_render_volume(tl_context* ctx, const tl_scene* scene, int spp, tl_image** out) {
    TL_GUARD_BEGIN
    require(scene && out, "tl_render_volume: null argument");
    VolumeScene vs = build_volume_scene(scene->doc.spec);
    TraceConfig cfg;
    cfg.spp = spp > 0 ? spp : 64;
    cfg.seed = ctx->seed ? ctx->seed : scene->doc.spec.seed_render;
    cfg.threads = ctx->threads;
    *out = wrap_image(trace(vs, cfg));
    TL_GUARD_END(ctx)
}

tl_status tl_render_pair(tl_context* ctx, const tl_scene* scene, int spp, double jitter_deg,
                         tl_image** flash, tl_image** noflash) {
    TL_GUARD_BEGIN
    require(scene && flash && noflash, "tl_render_pair: null argument");
    VolumeScene vs = build_volume_scene(scene->doc.spec);
    TraceConfig cfg;
    cfg.spp = spp > 0 ? spp : 64;
    cfg.seed = ctx->seed ? ctx->seed : scene->doc.spec.seed_render;
    cfg.threads = ctx->threads;
    Image f, n;
    render_scene_pair(vs, cfg, jitter_deg, scene->doc.spec.seed_jitter, f, n);
    *flash = wrap_image(std::move(f));
    *noflash = wrap_image(std::move(n));
    TL_GUARD_END(ctx)
}

tl_status tl_rasterize_gbuffer(tl_context* ctx, const tl_scene* scene, tl_image** depth,
                               tl_image** normal, tl_image** rough, tl_image** mask) {
    TL_GUARD_BEGIN
    require(scene && depth && normal && rough && mask, "tl_rasterize_gbuffer: null argument");
    VolumeScene vs = build_volume_scene(scene->doc.spec);
    GBuffer g = rasterize_gbuffer(vs, scene->doc.spec.camera);
    *depth = wrap_image(std::move(g.depth));
    *normal = wrap_image(std::move(g.normal));
    *rough = wrap_image(std::move(g.rough));
    *mask = wrap_image(std::move(g.mask));
    TL_GUARD_END(ctx)
}

/* ------------------------------------------------------------------ */

tl_status tl_sh_project(tl_context* ctx, const tl_image* envmap, double yaw, int64_t n_samples,
                        uint64_t seed, double out_sh[27]) {
    TL_GUARD_BEGIN
    require(envmap && out_sh, "tl_sh_project: null argument");
    EnvMap env;
    env.image = envmap->image;
    env.yaw = yaw;
    Sh3x9 sh = project_envmap(env, n_samples > 0 ? n_samples : 1000000, seed, ctx->threads);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 9; ++j) out_sh[c * 9 + j] = sh[c][j];
    TL_GUARD_END(ctx)
}

/* ------------------------------------------------------------------ */

tl_status tl_synth_corpus(tl_context* ctx, int n_scenes, const char* out_dir, uint64_t seed,
                          int resolution, int spp, int emit_tuples, char** report_json) {
    if (ctx) ctx->last_error.clear();
    try {
        require(out_dir, "tl_synth_corpus: null out_dir");
        CorpusOptions options;
        options.resolution = resolution > 0 ? resolution : 256;
        options.trace.spp = spp > 0 ? spp : 64;
        options.emit_tuples = emit_tuples != 0;
        options.threads = ctx ? ctx->threads : 1;
        CorpusReport report = build_corpus(n_scenes, out_dir, seed, options);
        if (report_json) {
            json j;
            j["requested"] = report.requested;
            j["built"] = report.scene_ids;
            j["failed"] = report.failed;
            *report_json = dup_string(j.dump(2));
        }
        if (!report.failed.empty())
            return record_error(ctx, TL_ERR_PARTIAL, "some scenes failed to build");
        return TL_OK;
    } catch (const std::exception& e) {
        return classify(ctx, e);
    }
}

tl_status tl_corpus_validate(tl_context* ctx, const char* corpus_dir, char** report_json) {
    TL_GUARD_BEGIN
    require(corpus_dir, "tl_corpus_validate: null corpus_dir");
    std::ifstream in(std::string(corpus_dir) + "/corpus.json");
    if (!in) throw MissingFileError("corpus.json not found in " + std::string(corpus_dir));
    json manifest = json::parse(in);
    json checked = json::array();
    for (const json& entry : manifest.at("scenes")) {
        std::string id = entry.at("id");
        ScenePackage pkg = read_package(std::string(corpus_dir) + "/" + id);
        validate_package(pkg);
        checked.push_back(id);
    }
    if (report_json) {
        json j;
        j["validated"] = checked;
        *report_json = dup_string(j.dump(2));
    }
    TL_GUARD_END(ctx)
}

tl_status tl_corpus_regen(tl_context* ctx, const char* corpus_dir, const char* scene_id,
                          const char* out_dir) {
    TL_GUARD_BEGIN
    require(corpus_dir && scene_id, "tl_corpus_regen: null argument");
    regenerate_scene(corpus_dir, scene_id, out_dir ? out_dir : "");
    TL_GUARD_END(ctx)
}

/* ------------------------------------------------------------------ */

tl_status tl_gradcheck(tl_context* ctx, int n_scenes, int resolution, double step,
                       double tolerance, char** table_json) {
    TL_GUARD_BEGIN
    require(n_scenes >= 1, "tl_gradcheck: n_scenes must be >= 1");
    ParamRanges ranges;
    if (step <= 0.0) step = 1e-3;
    if (tolerance <= 0.0) tolerance = 1e-4;
    int res = resolution > 0 ? resolution : 64;

    json rows = json::array();
    std::array<double, kParamGroupCount> worst{};
    int kinks = 0;
    for (int s = 0; s < n_scenes; ++s) {
        GradCheckResult r = gradcheck_scene(res, (ctx ? ctx->seed : 0) + uint64_t(s), step, ranges,
                                            ctx ? ctx->threads : 1);
        kinks += r.kink_pixels;
        for (int gi = 0; gi < kParamGroupCount; ++gi)
            worst[size_t(gi)] = std::max(worst[size_t(gi)], r.max_rel_err[size_t(gi)]);
    }
    bool pass = true;
    for (int gi = 0; gi < kParamGroupCount; ++gi) {
        json row;
        row["group"] = param_group_name(ParamGroup(gi));
        row["max_rel_err"] = worst[size_t(gi)];
        row["pass"] = worst[size_t(gi)] < tolerance;
        pass = pass && worst[size_t(gi)] < tolerance;
        rows.push_back(row);
    }
    if (table_json) {
        json j;
        j["scenes"] = n_scenes;
        j["resolution"] = res;
        j["step"] = step;
        j["tolerance"] = tolerance;
        j["kink_pixels_excluded"] = kinks;
        j["rows"] = rows;
        j["pass"] = pass;
        *table_json = dup_string(j.dump(2));
    }
    TL_GUARD_END(ctx)
}

namespace {

OptimConfig optim_from_json(const json& j) {
    OptimConfig cfg;
    cfg.lr = j.value("lr", cfg.lr);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.init_seed = j.value("seed", uint64_t(0));
    return cfg;
}

}  // namespace

tl_status tl_fit_direct(tl_context* ctx, const tl_scene* scene, const tl_image* flash,
                        const tl_image* mask, const char* options_json, char** report_json,
                        tl_image** rerender) {
    if (ctx) ctx->last_error.clear();
    try {
        require(scene && flash && mask, "tl_fit_direct: null argument");
        json opts = options_json ? json::parse(options_json) : json::object();

        VolumeScene vs = build_volume_scene(scene->doc.spec);
        Camera camera = scene->doc.spec.camera;
        camera.width = flash->image.width;
        camera.height = flash->image.height;
        GBuffer g = rasterize_gbuffer(vs, camera);

        FitDirectInput input;
        input.observed = flash->image;
        input.mask.width = mask->image.width;
        input.mask.height = mask->image.height;
        input.mask.channels = 1;
        input.mask.data.resize(input.mask.pixel_count());
        for (size_t i = 0; i < input.mask.pixel_count(); ++i)
            input.mask.data[i] = mask->image.data[i * size_t(mask->image.channels)] > 0.5f ? 1.0f
                                                                                           : 0.0f;
        input.geometry = g;
        input.camera = camera;

        FitDirectOptions options;
        options.optim = optim_from_json(opts);
        options.optim.steps = opts.value("steps", 400);
        options.optim.lr = opts.value("lr", 2e-3);
        options.threads = ctx ? ctx->threads : 1;
        std::string init = opts.value("init", "midpoint");
        options.init = init == "random" ? FitDirectOptions::Init::Random
                                        : FitDirectOptions::Init::Midpoint;
        options.refine_normals = opts.value("refine_normals", false);

        FitReport report = fit_direct(input, options);
        if (report_json) *report_json = dup_string(report.to_json());
        if (rerender) {
            SceneParams sp = denormalize_params(report.final_params, options.ranges);
            GBuffer gb = g;
            for (size_t i = 0; i < gb.rough.data.size(); ++i)
                gb.rough.data[i] = float(clamp(double(sp.rough.data[i]), 1e-3, 1.0));
            Illumination il = sp.illum;
            il.flash_intensity = std::max(0.0, il.flash_intensity);
            *rerender = wrap_image(render_direct(gb, il, camera, ctx ? ctx->threads : 1));
        }
        if (report.diverged) return record_error(ctx, TL_ERR_DIVERGED, "fit_direct diverged");
        return TL_OK;
    } catch (const std::exception& e) {
        return classify(ctx, e);
    }
}

tl_status tl_fit_sss(tl_context* ctx, const tl_scene* scene, const tl_image* flash,
                     const tl_image* noflash, const tl_image* mask, const char* options_json,
                     char** report_json, tl_image** rerender) {
    if (ctx) ctx->last_error.clear();
    try {
        require(scene && flash, "tl_fit_sss: null argument");
        json opts = options_json ? json::parse(options_json) : json::object();

        FitSssInput input;
        input.observed_flash = flash->image;
        if (noflash) input.observed_noflash = noflash->image;
        if (mask) {
            input.mask = Image(mask->image.width, mask->image.height, 1);
            for (size_t i = 0; i < input.mask.pixel_count(); ++i)
                input.mask.data[i] = mask->image.data[i * size_t(mask->image.channels)] > 0.5f
                                         ? 1.0f
                                         : 0.0f;
        }
        input.scene = build_volume_scene(scene->doc.spec);

        FitSssOptions options;
        options.optim = optim_from_json(opts);
        options.optim.steps = opts.value("steps", 200);
        options.optim.lr = opts.value("lr", 2e-2);
        options.coarse_res = opts.value("coarse_res", 64);
        options.spp = opts.value("spp", 128);
        options.fd_spp = opts.value("fd_spp", 48);
        options.fd_step = opts.value("fd_step", 5e-3);
        options.fit_flash_intensity = opts.value("fit_flash_intensity", true);
        options.fit_g = opts.value("fit_g", true);
        options.threads = ctx ? ctx->threads : 1;
        std::string init = opts.value("init", "midpoint");
        options.init = init == "random" ? FitSssOptions::Init::Random
                                        : FitSssOptions::Init::Midpoint;

        FitReport report = fit_sss(input, options);
        if (report_json) *report_json = dup_string(report.to_json());
        if (rerender) {
            ParamRanges R;
            VolumeScene vs = input.scene;
            const ParamLayout& L = report.final_params.layout;
            for (int c = 0; c < 3; ++c) {
                vs.sss.sigma_t[c] = std::max(
                    0.0, denormalize_scalar(report.final_params[L.sigma_t_offset() + size_t(c)],
                                            R.sigma_t_lo, R.sigma_t_hi));
                vs.sss.alpha[c] = clamp(
                    denormalize_scalar(report.final_params[L.alpha_offset() + size_t(c)],
                                       R.alpha_lo, R.alpha_hi),
                    0.0, 0.999);
            }
            vs.sss.g = clamp(denormalize_scalar(report.final_params[L.g_offset()], R.g_lo, R.g_hi),
                             -0.999, 0.999);
            if (vs.flash)
                vs.flash->radiance = std::max(
                    0.0, denormalize_scalar(report.final_params[L.flash_offset()], R.flash_lo,
                                            R.flash_hi));
            TraceConfig cfg;
            cfg.spp = opts.value("rerender_spp", 128);
            cfg.seed = ctx ? ctx->seed : 0;
            cfg.threads = ctx ? ctx->threads : 1;
            *rerender = wrap_image(trace(vs, cfg));
        }
        if (report.diverged) return record_error(ctx, TL_ERR_DIVERGED, "fit_sss diverged");
        return TL_OK;
    } catch (const std::exception& e) {
        return classify(ctx, e);
    }
}

}  // extern "C"
