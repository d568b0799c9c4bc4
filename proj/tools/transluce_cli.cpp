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

// Command-line frontend. Talks to the toolkit exclusively through the C API
// in transluce.h. Exit codes: 0 success, 2 input error, 3 runtime error,
// 4 partial failure.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "transluce.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitPartial = 4;

struct Ctx {
    tl_context* ctx = tl_context_create();
    bool quiet = false;
    ~Ctx() { tl_context_destroy(ctx); }
};

int exit_code_of(tl_status status) {
    switch (status) {
        case TL_OK: return kExitOk;
        case TL_ERR_INVALID_ARGUMENT:
        case TL_ERR_SCHEMA:
        case TL_ERR_IO: return kExitInput;
        case TL_ERR_PARTIAL: return kExitPartial;
        default: return kExitRuntime;
    }
}

int fail(const Ctx& c, tl_status status) {
    std::fprintf(stderr, "error: %s\n", tl_last_error(c.ctx));
    return exit_code_of(status);
}

void say(const Ctx& c, const std::string& line) {
    if (!c.quiet) std::printf("%s\n", line.c_str());
}

struct ImageHandle {
    tl_image* img = nullptr;
    ~ImageHandle() { tl_image_destroy(img); }
};

struct SceneHandle {
    tl_scene* scene = nullptr;
    ~SceneHandle() { tl_scene_destroy(scene); }
};

struct StringHandle {
    char* s = nullptr;
    ~StringHandle() { tl_string_free(s); }
};

bool parse_resolution(const std::string& res, int& w, int& h) {
    size_t x = res.find('x');
    if (x == std::string::npos) return false;
    try {
        w = std::stoi(res.substr(0, x));
        h = std::stoi(res.substr(x + 1));
    } catch (...) {
        return false;
    }
    return w >= 1 && h >= 1;
}

int write_outputs(const Ctx& c, tl_image* img, const std::string& path, bool preview) {
    tl_status s = tl_image_write_pfm(c.ctx, img, path.c_str());
    if (s != TL_OK) return fail(c, s);
    say(c, "wrote " + path);
    if (preview) {
        std::string png = path.substr(0, path.rfind('.')) + ".png";
        s = tl_image_write_preview_png(c.ctx, img, png.c_str());
        if (s != TL_OK) return fail(c, s);
        say(c, "wrote " + png);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transluce: rendering and inverse rendering of translucent objects"};
    app.require_subcommand(1);

    Ctx c;
    uint64_t seed = 0;
    int threads = 0;
    std::string res_flag;
    app.add_option("--seed", seed, "Global random seed");
    app.add_option("--threads", threads,
                   "Worker threads (default: TRANSLUCE_THREADS or hardware)");
    app.add_option("--res", res_flag, "Render resolution WxH (e.g. 256x256)");
    app.add_flag("--quiet", c.quiet, "Suppress progress output");

    // render ---------------------------------------------------------------
    auto* render = app.add_subcommand("render", "Render a scene file");
    std::string render_scene, render_mode = "volume", render_out = "render.pfm";
    int render_spp = 64;
    bool render_preview = false;
    render->add_option("scene", render_scene, "Scene JSON file")->required();
    render->add_option("--mode", render_mode, "Renderer: direct | volume")
        ->check(CLI::IsMember({"direct", "volume"}));
    render->add_option("--spp", render_spp, "Samples per pixel (volume mode)");
    render->add_option("--out", render_out, "Output PFM path");
    render->add_flag("--preview", render_preview, "Also write a tonemapped PNG preview");

    // synth ----------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Build a synthetic dataset corpus");
    int synth_n = 1, synth_res = 256, synth_spp = 64;
    std::string synth_out = "corpus";
    bool synth_tuples = false, synth_validate = false;
    synth->add_option("--n", synth_n, "Number of scenes")->required();
    synth->add_option("--out", synth_out, "Corpus directory");
    synth->add_option("--spp", synth_spp, "Samples per pixel");
    synth->add_option("--scene-res", synth_res, "Scene image resolution");
    synth->add_flag("--tuples", synth_tuples, "Also emit neural-renderer training tuples");
    synth->add_flag("--validate", synth_validate, "Re-read and validate every package");

    // invert ---------------------------------------------------------------
    auto* invert = app.add_subcommand("invert", "Recover scene parameters from images");
    std::string inv_flash, inv_noflash, inv_mask, inv_scene, inv_mode = "direct";
    std::string inv_report = "fit_report.json", inv_render = "refit.pfm";
    int inv_steps = -1;
    double inv_lr = 0.0;
    invert->add_option("--flash", inv_flash, "Observed flash image (PFM)")->required();
    invert->add_option("--noflash", inv_noflash, "Observed no-flash image (PFM)");
    invert->add_option("--mask", inv_mask, "Object mask (PNG)")->required();
    invert->add_option("--scene", inv_scene, "Scene JSON providing known geometry")->required();
    invert->add_option("--mode", inv_mode, "Fit mode: direct | sss")
        ->check(CLI::IsMember({"direct", "sss"}));
    invert->add_option("--steps", inv_steps, "Optimizer steps");
    invert->add_option("--lr", inv_lr, "Learning rate");
    invert->add_option("--report", inv_report, "Fit report JSON output");
    invert->add_option("--render", inv_render, "Re-render under recovered parameters");

    // gradcheck ------------------------------------------------------------
    auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
    int gc_scenes = 20, gc_res = 64;
    double gc_step = 1e-3, gc_tol = 1e-4;
    gradcheck->add_option("--scenes", gc_scenes, "Number of random scenes");
    gradcheck->add_option("--res", gc_res, "Scene resolution");
    gradcheck->add_option("--step", gc_step, "Finite-difference step (normalized space)");
    gradcheck->add_option("--tol", gc_tol, "Max relative error tolerance");

    // edit -----------------------------------------------------------------
    auto* edit = app.add_subcommand("edit", "Edit SSS parameters and re-render");
    std::string edit_in, edit_lerp, edit_prefix = "edit";
    std::vector<std::string> edit_sets;
    double edit_t = 0.5;
    int edit_spp = 64;
    edit->add_option("--in", edit_in, "Scene JSON file")->required();
    edit->add_option("--set", edit_sets, "Edits like sss.alpha=0.9,0.5,0.5 or sss.g=0.3");
    edit->add_option("--lerp", edit_lerp, "Interpolate SSS toward this scene file");
    edit->add_option("--t", edit_t, "Interpolation parameter in [0,1]");
    edit->add_option("--spp", edit_spp, "Samples per pixel");
    edit->add_option("--out", edit_prefix, "Output prefix (writes <prefix>_before/after.pfm)");

    // shproject ------------------------------------------------------------
    auto* shproject = app.add_subcommand("shproject", "Project an envmap to SH coefficients");
    std::string sh_env, sh_out = "sh.json";
    double sh_yaw = 0.0;
    int64_t sh_samples = 1000000;
    shproject->add_option("--env", sh_env, "Equirectangular envmap (PFM)")->required();
    shproject->add_option("--yaw", sh_yaw, "Rotation about the vertical axis (radians)");
    shproject->add_option("--samples", sh_samples, "Monte Carlo sample count");
    shproject->add_option("--out", sh_out, "Output JSON path");

    CLI11_PARSE(app, argc, argv);

    tl_context_set_seed(c.ctx, seed);
    if (threads >= 1) tl_context_set_threads(c.ctx, threads);

    int res_w = 0, res_h = 0;
    if (!res_flag.empty() && !parse_resolution(res_flag, res_w, res_h)) {
        std::fprintf(stderr, "error: --res expects WxH, got '%s'\n", res_flag.c_str());
        return kExitInput;
    }

    if (render->parsed()) {
        SceneHandle scene;
        tl_status s = tl_scene_load(c.ctx, render_scene.c_str(), &scene.scene);
        if (s != TL_OK) return fail(c, s);
        if (res_w) {
            s = tl_scene_set_resolution(c.ctx, scene.scene, res_w, res_h);
            if (s != TL_OK) return fail(c, s);
        }
        ImageHandle img;
        s = render_mode == "direct" ? tl_render_direct(c.ctx, scene.scene, &img.img)
                                    : tl_render_volume(c.ctx, scene.scene, render_spp, &img.img);
        if (s != TL_OK) return fail(c, s);
        return write_outputs(c, img.img, render_out, render_preview);
    }

    if (synth->parsed()) {
        if (res_w) synth_res = res_w;
        StringHandle report;
        tl_status s = tl_synth_corpus(c.ctx, synth_n, synth_out.c_str(), seed, synth_res,
                                      synth_spp, synth_tuples ? 1 : 0, &report.s);
        if (report.s) say(c, report.s);
        if (s != TL_OK) return fail(c, s);
        if (synth_validate) {
            StringHandle vreport;
            s = tl_corpus_validate(c.ctx, synth_out.c_str(), &vreport.s);
            if (s != TL_OK) return fail(c, s);
            say(c, "validation passed");
        }
        return kExitOk;
    }

    if (invert->parsed()) {
        SceneHandle scene;
        tl_status s = tl_scene_load(c.ctx, inv_scene.c_str(), &scene.scene);
        if (s != TL_OK) return fail(c, s);
        ImageHandle flash, noflash, mask;
        s = tl_image_read_pfm(c.ctx, inv_flash.c_str(), &flash.img);
        if (s != TL_OK) return fail(c, s);
        if (!inv_noflash.empty()) {
            s = tl_image_read_pfm(c.ctx, inv_noflash.c_str(), &noflash.img);
            if (s != TL_OK) return fail(c, s);
        }
        s = tl_image_read_png(c.ctx, inv_mask.c_str(), &mask.img);
        if (s != TL_OK) return fail(c, s);

        if (tl_image_width(flash.img) != tl_image_width(mask.img) ||
            tl_image_height(flash.img) != tl_image_height(mask.img) ||
            (noflash.img && (tl_image_width(noflash.img) != tl_image_width(flash.img) ||
                             tl_image_height(noflash.img) != tl_image_height(flash.img)))) {
            std::fprintf(stderr, "error: input images disagree on resolution\n");
            return kExitInput;
        }

        json opts;
        opts["seed"] = seed;
        if (inv_steps >= 0) opts["steps"] = inv_steps;
        if (inv_lr > 0.0) opts["lr"] = inv_lr;
        std::string opts_text = opts.dump();

        StringHandle report;
        ImageHandle rerender;
        if (inv_mode == "direct")
            s = tl_fit_direct(c.ctx, scene.scene, flash.img, mask.img, opts_text.c_str(),
                              &report.s, &rerender.img);
        else
            s = tl_fit_sss(c.ctx, scene.scene, flash.img, noflash.img, mask.img,
                           opts_text.c_str(), &report.s, &rerender.img);

        if (report.s) {
            FILE* f = std::fopen(inv_report.c_str(), "w");
            if (f) {
                std::fputs(report.s, f);
                std::fclose(f);
                say(c, "wrote " + inv_report);
            }
        }
        if (rerender.img) {
            tl_status ws = tl_image_write_pfm(c.ctx, rerender.img, inv_render.c_str());
            if (ws == TL_OK) say(c, "wrote " + inv_render);
        }
        if (s != TL_OK) return fail(c, s);
        return kExitOk;
    }

    if (gradcheck->parsed()) {
        if (res_w) gc_res = res_w;
        StringHandle table;
        tl_status s = tl_gradcheck(c.ctx, gc_scenes, gc_res, gc_step, gc_tol, &table.s);
        if (s != TL_OK) return fail(c, s);
        json j = json::parse(table.s);
        std::printf("%-16s %-14s %s\n", "group", "max_rel_err", "pass");
        for (const auto& row : j["rows"])
            std::printf("%-16s %-14.3e %s\n", row["group"].get<std::string>().c_str(),
                        row["max_rel_err"].get<double>(),
                        row["pass"].get<bool>() ? "yes" : "NO");
        std::printf("kink pixels excluded: %d\n", j["kink_pixels_excluded"].get<int>());
        if (!j["pass"].get<bool>()) {
            std::fprintf(stderr, "gradcheck FAILED (tolerance %g)\n", gc_tol);
            return 1;
        }
        say(c, "gradcheck passed");
        return kExitOk;
    }

    if (edit->parsed()) {
        SceneHandle scene;
        tl_status s = tl_scene_load(c.ctx, edit_in.c_str(), &scene.scene);
        if (s != TL_OK) return fail(c, s);
        if (res_w) {
            s = tl_scene_set_resolution(c.ctx, scene.scene, res_w, res_h);
            if (s != TL_OK) return fail(c, s);
        }
        ImageHandle before;
        s = tl_render_volume(c.ctx, scene.scene, edit_spp, &before.img);
        if (s != TL_OK) return fail(c, s);

        for (const std::string& assignment : edit_sets) {
            s = tl_scene_set(c.ctx, scene.scene, assignment.c_str());
            if (s != TL_OK) return fail(c, s);
        }
        if (!edit_lerp.empty()) {
            SceneHandle other;
            s = tl_scene_load(c.ctx, edit_lerp.c_str(), &other.scene);
            if (s != TL_OK) return fail(c, s);
            s = tl_scene_lerp_sss(c.ctx, scene.scene, other.scene, edit_t);
            if (s != TL_OK) return fail(c, s);
        }

        ImageHandle after;
        s = tl_render_volume(c.ctx, scene.scene, edit_spp, &after.img);
        if (s != TL_OK) return fail(c, s);
        int rc = write_outputs(c, before.img, edit_prefix + "_before.pfm", true);
        if (rc != kExitOk) return rc;
        return write_outputs(c, after.img, edit_prefix + "_after.pfm", true);
    }

    if (shproject->parsed()) {
        ImageHandle env;
        tl_status s = tl_image_read_pfm(c.ctx, sh_env.c_str(), &env.img);
        if (s != TL_OK) return fail(c, s);
        double coeffs[27];
        s = tl_sh_project(c.ctx, env.img, sh_yaw, sh_samples, seed, coeffs);
        if (s != TL_OK) return fail(c, s);
        json j;
        j["convention"] = "orthonormal real SH, bands 0-2, order Y00,Y1-1,Y10,Y11,Y2-2,Y2-1,Y20,Y21,Y22";
        j["yaw"] = sh_yaw;
        json rows = json::array();
        for (int cch = 0; cch < 3; ++cch) {
            json row = json::array();
            for (int k = 0; k < 9; ++k) row.push_back(coeffs[cch * 9 + k]);
            rows.push_back(row);
        }
        j["sh"] = rows;
        FILE* f = std::fopen(sh_out.c_str(), "w");
        if (!f) {
            std::fprintf(stderr, "error: cannot write %s\n", sh_out.c_str());
            return kExitInput;
        }
        std::string text = j.dump(2) + "\n";
        std::fputs(text.c_str(), f);
        std::fclose(f);
        say(c, "wrote " + sh_out);
        return kExitOk;
    }

    return kExitInput;
}
