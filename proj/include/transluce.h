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

/*
 * C interface to the transluce rendering and inverse-rendering toolkit.
 *
 * All entry points return tl_status; TL_OK is 0. On failure the context
 * keeps a human-readable message, retrievable with tl_last_error(). Handles
 * are opaque; every tl_*_create / out-parameter object is released with the
 * matching destroy function. Strings returned through char** out-parameters
 * are heap-allocated and released with tl_string_free().
 *
 * Thread model: a context may be used from one thread at a time; rendering
 * parallelism is internal and controlled by tl_context_set_threads.
 */

#ifndef TRANSLUCE_H
#define TRANSLUCE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tl_status {
    TL_OK = 0,
    TL_ERR_INVALID_ARGUMENT = 1,
    TL_ERR_SCHEMA = 2,
    TL_ERR_IO = 3,
    TL_ERR_RUNTIME = 4,
    TL_ERR_DIVERGED = 5,
    TL_ERR_PARTIAL = 6
} tl_status;

typedef struct tl_context tl_context;
typedef struct tl_scene tl_scene;
typedef struct tl_image tl_image;

const char* tl_version(void);

/* ------------------------------------------------------------------ */
/* Context                                                              */

tl_context* tl_context_create(void);
void tl_context_destroy(tl_context* ctx);
void tl_context_set_threads(tl_context* ctx, int threads);
int tl_context_threads(const tl_context* ctx);
void tl_context_set_seed(tl_context* ctx, uint64_t seed);
uint64_t tl_context_seed(const tl_context* ctx);
const char* tl_last_error(const tl_context* ctx);

void tl_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Images                                                               */

tl_status tl_image_create(tl_context* ctx, int width, int height, int channels, tl_image** out);
void tl_image_destroy(tl_image* img);
int tl_image_width(const tl_image* img);
int tl_image_height(const tl_image* img);
int tl_image_channels(const tl_image* img);
float* tl_image_data(tl_image* img);
const float* tl_image_data_const(const tl_image* img);

tl_status tl_image_read_pfm(tl_context* ctx, const char* path, tl_image** out);
tl_status tl_image_write_pfm(tl_context* ctx, const tl_image* img, const char* path);
tl_status tl_image_read_png(tl_context* ctx, const char* path, tl_image** out);
tl_status tl_image_write_png(tl_context* ctx, const tl_image* img, const char* path);
/* Exposure-normalized gamma-2.2 preview. */
tl_status tl_image_write_preview_png(tl_context* ctx, const tl_image* img, const char* path);

/* ------------------------------------------------------------------ */
/* Scenes                                                               */

tl_status tl_scene_load(tl_context* ctx, const char* path, tl_scene** out);
tl_status tl_scene_parse(tl_context* ctx, const char* json_text, tl_scene** out);
/* Uniform dataset-distribution scene (procedural assets). */
tl_status tl_scene_sample(tl_context* ctx, uint64_t seed, tl_scene** out);
void tl_scene_destroy(tl_scene* scene);
tl_status tl_scene_save(tl_context* ctx, const tl_scene* scene, const char* path);
/* Scene JSON text; free with tl_string_free. */
tl_status tl_scene_to_json(tl_context* ctx, const tl_scene* scene, char** out);
/* "field=value" edits, e.g. "sss.alpha=0.9,0.5,0.5" or "sss.g=0.3". */
tl_status tl_scene_set(tl_context* ctx, tl_scene* scene, const char* assignment);
/* Componentwise SSS interpolation toward `other` at t in [0,1]. */
tl_status tl_scene_lerp_sss(tl_context* ctx, tl_scene* scene, const tl_scene* other, double t);
tl_status tl_scene_set_resolution(tl_context* ctx, tl_scene* scene, int width, int height);

/* ------------------------------------------------------------------ */
/* Rendering                                                            */

/* Closed-form direct-illumination render (GBuffer rasterized from the
 * scene geometry; SH projected from the environment unless the document
 * pins coefficients). */
tl_status tl_render_direct(tl_context* ctx, const tl_scene* scene, tl_image** out);
/* Volumetric path-traced flash image. spp <= 0 uses 64. */
tl_status tl_render_volume(tl_context* ctx, const tl_scene* scene, int spp, tl_image** out);
/* Flash / no-flash pair (no-flash applies the jitter). */
tl_status tl_render_pair(tl_context* ctx, const tl_scene* scene, int spp, double jitter_deg,
                         tl_image** flash, tl_image** noflash);

/* GT buffer rasterization: depth(1ch), normal(3ch), rough(1ch), mask(1ch). */
tl_status tl_rasterize_gbuffer(tl_context* ctx, const tl_scene* scene, tl_image** depth,
                               tl_image** normal, tl_image** rough, tl_image** mask);

/* ------------------------------------------------------------------ */
/* Spherical harmonics                                                  */

/* Projects an equirectangular envmap (3ch, width = 2*height) onto 3x9
 * coefficients (row-major RGB x 9) with n_samples stratified sphere
 * samples. */
tl_status tl_sh_project(tl_context* ctx, const tl_image* envmap, double yaw, int64_t n_samples,
                        uint64_t seed, double out_sh[27]);

/* ------------------------------------------------------------------ */
/* Dataset synthesis                                                    */

/* Builds n scene packages under out_dir; returns a JSON report (scene ids
 * and failures). TL_ERR_PARTIAL when some scenes failed. */
tl_status tl_synth_corpus(tl_context* ctx, int n_scenes, const char* out_dir, uint64_t seed,
                          int resolution, int spp, int emit_tuples, char** report_json);
/* Re-reads every package and re-checks invariants + checksums. */
tl_status tl_corpus_validate(tl_context* ctx, const char* corpus_dir, char** report_json);
/* Regenerates one scene bit-exactly from the corpus manifest. */
tl_status tl_corpus_regen(tl_context* ctx, const char* corpus_dir, const char* scene_id,
                          const char* out_dir);

/* ------------------------------------------------------------------ */
/* Gradient checking and inversion                                      */

/* Analytic-vs-finite-difference check on n random scenes; JSON table of
 * per-group max relative errors plus a "pass" flag at `tolerance`. */
tl_status tl_gradcheck(tl_context* ctx, int n_scenes, int resolution, double step,
                       double tolerance, char** table_json);

/* Analysis-by-synthesis through the direct renderer. Recovers roughness,
 * SH, and flash intensity. Geometry comes from the scene; observed flash
 * and mask are images. options_json may set steps/lr/init. Outputs a JSON
 * report and the re-render under recovered parameters. Returns
 * TL_ERR_DIVERGED (report still produced) when the optimizer diverged. */
tl_status tl_fit_direct(tl_context* ctx, const tl_scene* scene, const tl_image* flash,
                        const tl_image* mask, const char* options_json, char** report_json,
                        tl_image** rerender);

/* Volumetric analysis-by-synthesis for {sigma_t, alpha, g, i} with
 * common-random-number finite differences. noflash may be NULL (one-shot
 * mode); mask may be NULL. */
tl_status tl_fit_sss(tl_context* ctx, const tl_scene* scene, const tl_image* flash,
                     const tl_image* noflash, const tl_image* mask, const char* options_json,
                     char** report_json, tl_image** rerender);

#ifdef __cplusplus
}
#endif

#endif /* TRANSLUCE_H */
