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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "transluce.h"

namespace fs = std::filesystem;

namespace {

struct Fixture {
    tl_context* ctx = tl_context_create();
    fs::path dir;
    Fixture() {
        dir = fs::temp_directory_path() / "transluce_capi";
        fs::remove_all(dir);
        fs::create_directories(dir);
        tl_context_set_threads(ctx, 2);
    }
    ~Fixture() {
        tl_context_destroy(ctx);
        fs::remove_all(dir);
    }
};

}  // namespace

TEST_CASE("context basics and version") {
    CHECK(std::strlen(tl_version()) > 0);
    tl_context* ctx = tl_context_create();
    tl_context_set_threads(ctx, 3);
    CHECK(tl_context_threads(ctx) == 3);
    tl_context_set_seed(ctx, 99);
    CHECK(tl_context_seed(ctx) == 99);
    CHECK(std::string(tl_last_error(ctx)).empty());
    tl_context_destroy(ctx);
}

TEST_CASE("error codes and messages for bad inputs") {
    Fixture f;
    tl_image* img = nullptr;
    CHECK(tl_image_read_pfm(f.ctx, (f.dir / "missing.pfm").string().c_str(), &img) == TL_ERR_IO);
    CHECK(std::string(tl_last_error(f.ctx)).find("missing.pfm") != std::string::npos);

    tl_scene* scene = nullptr;
    CHECK(tl_scene_parse(f.ctx, "{ not json", &scene) == TL_ERR_SCHEMA);
    CHECK(tl_image_create(f.ctx, -4, 2, 3, &img) == TL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("image lifecycle and pfm round trip through the c api") {
    Fixture f;
    tl_image* img = nullptr;
    REQUIRE(tl_image_create(f.ctx, 8, 6, 3, &img) == TL_OK);
    CHECK(tl_image_width(img) == 8);
    CHECK(tl_image_height(img) == 6);
    CHECK(tl_image_channels(img) == 3);
    float* data = tl_image_data(img);
    for (int i = 0; i < 8 * 6 * 3; ++i) data[i] = float(i) * 0.25f;

    std::string path = (f.dir / "img.pfm").string();
    REQUIRE(tl_image_write_pfm(f.ctx, img, path.c_str()) == TL_OK);
    tl_image* back = nullptr;
    REQUIRE(tl_image_read_pfm(f.ctx, path.c_str(), &back) == TL_OK);
    CHECK(std::memcmp(tl_image_data_const(back), data, 8 * 6 * 3 * 4) == 0);
    tl_image_destroy(back);
    tl_image_destroy(img);
}

TEST_CASE("scene sample, edit, save, and volumetric render through the c api") {
    Fixture f;
    tl_scene* scene = nullptr;
    REQUIRE(tl_scene_sample(f.ctx, 42, &scene) == TL_OK);
    REQUIRE(tl_scene_set_resolution(f.ctx, scene, 12, 12) == TL_OK);
    REQUIRE(tl_scene_set(f.ctx, scene, "sss.g=0.25") == TL_OK);
    CHECK(tl_scene_set(f.ctx, scene, "sss.g=1.4") == TL_ERR_INVALID_ARGUMENT);

    char* json_text = nullptr;
    REQUIRE(tl_scene_to_json(f.ctx, scene, &json_text) == TL_OK);
    CHECK(std::string(json_text).find("transluce-scene-v1") != std::string::npos);

    tl_scene* parsed = nullptr;
    REQUIRE(tl_scene_parse(f.ctx, json_text, &parsed) == TL_OK);
    tl_string_free(json_text);

    tl_image* img = nullptr;
    tl_context_set_seed(f.ctx, 5);
    REQUIRE(tl_render_volume(f.ctx, parsed, 16, &img) == TL_OK);
    CHECK(tl_image_width(img) == 12);

    // Determinism through the API: same context seed, same bits.
    tl_image* img2 = nullptr;
    REQUIRE(tl_render_volume(f.ctx, parsed, 16, &img2) == TL_OK);
    CHECK(std::memcmp(tl_image_data_const(img), tl_image_data_const(img2),
                      12 * 12 * 3 * 4) == 0);
    tl_image_destroy(img);
    tl_image_destroy(img2);

    std::string path = (f.dir / "scene.json").string();
    REQUIRE(tl_scene_save(f.ctx, parsed, path.c_str()) == TL_OK);
    tl_scene* loaded = nullptr;
    REQUIRE(tl_scene_load(f.ctx, path.c_str(), &loaded) == TL_OK);
    tl_scene_destroy(loaded);
    tl_scene_destroy(parsed);
    tl_scene_destroy(scene);
}

TEST_CASE("lerp through the c api hits both endpoints") {
    Fixture f;
    tl_scene *a = nullptr, *b = nullptr;
    REQUIRE(tl_scene_sample(f.ctx, 1, &a) == TL_OK);
    REQUIRE(tl_scene_sample(f.ctx, 2, &b) == TL_OK);
    char* before = nullptr;
    REQUIRE(tl_scene_to_json(f.ctx, a, &before) == TL_OK);
    REQUIRE(tl_scene_lerp_sss(f.ctx, a, b, 0.0) == TL_OK);
    char* after = nullptr;
    REQUIRE(tl_scene_to_json(f.ctx, a, &after) == TL_OK);
    CHECK(std::string(before) == after);
    CHECK(tl_scene_lerp_sss(f.ctx, a, b, 1.5) == TL_ERR_INVALID_ARGUMENT);
    tl_string_free(before);
    tl_string_free(after);
    tl_scene_destroy(a);
    tl_scene_destroy(b);
}

TEST_CASE("direct render, gbuffer rasterization, and sh projection") {
    Fixture f;
    tl_scene* scene = nullptr;
    REQUIRE(tl_scene_sample(f.ctx, 7, &scene) == TL_OK);
    REQUIRE(tl_scene_set_resolution(f.ctx, scene, 16, 16) == TL_OK);

    tl_image* direct = nullptr;
    REQUIRE(tl_render_direct(f.ctx, scene, &direct) == TL_OK);
    CHECK(tl_image_channels(direct) == 3);
    tl_image_destroy(direct);

    tl_image *depth = nullptr, *normal = nullptr, *rough = nullptr, *mask = nullptr;
    REQUIRE(tl_rasterize_gbuffer(f.ctx, scene, &depth, &normal, &rough, &mask) == TL_OK);
    CHECK(tl_image_channels(depth) == 1);
    CHECK(tl_image_channels(normal) == 3);
    bool any_mask = false;
    const float* m = tl_image_data_const(mask);
    for (int i = 0; i < 16 * 16; ++i) any_mask = any_mask || m[i] > 0.5f;
    CHECK(any_mask);
    tl_image_destroy(depth);
    tl_image_destroy(normal);
    tl_image_destroy(rough);
    tl_image_destroy(mask);
    tl_scene_destroy(scene);

    // Constant envmap projects to band 0 = 2 sqrt(pi).
    tl_image* env = nullptr;
    REQUIRE(tl_image_create(f.ctx, 32, 16, 3, &env) == TL_OK);
    float* data = tl_image_data(env);
    for (int i = 0; i < 32 * 16 * 3; ++i) data[i] = 1.0f;
    double sh[27];
    REQUIRE(tl_sh_project(f.ctx, env, 0.0, 200000, 3, sh) == TL_OK);
    CHECK(std::abs(sh[0] - 2.0 * std::sqrt(M_PI)) < 1e-3);
    for (int j = 1; j < 9; ++j) CHECK(std::abs(sh[j]) < 0.01);
    tl_image_destroy(env);
}

TEST_CASE("corpus build, validate, and regenerate through the c api") {
    Fixture f;
    std::string corpus = (f.dir / "corpus").string();
    char* report = nullptr;
    REQUIRE(tl_synth_corpus(f.ctx, 2, corpus.c_str(), 11, 10, 4, 0, &report) == TL_OK);
    CHECK(std::string(report).find("scene-0001") != std::string::npos);
    tl_string_free(report);

    char* vreport = nullptr;
    REQUIRE(tl_corpus_validate(f.ctx, corpus.c_str(), &vreport) == TL_OK);
    tl_string_free(vreport);

    REQUIRE(tl_corpus_regen(f.ctx, corpus.c_str(), "scene-0000",
                            (f.dir / "regen").string().c_str()) == TL_OK);
    CHECK(fs::exists(f.dir / "regen" / "manifest.json"));
    CHECK(tl_corpus_regen(f.ctx, corpus.c_str(), "scene-nope", nullptr) == TL_ERR_IO);
}

TEST_CASE("gradcheck through the c api") {
    Fixture f;
    char* table = nullptr;
    REQUIRE(tl_gradcheck(f.ctx, 2, 16, 1e-3, 1e-4, &table) == TL_OK);
    std::string text(table);
    CHECK(text.find("\"pass\": true") != std::string::npos);
    CHECK(text.find("roughness") != std::string::npos);
    tl_string_free(table);
}

TEST_CASE("fit_direct through the c api recovers a self-rendered scene") {
    Fixture f;
    tl_scene* scene = nullptr;
    REQUIRE(tl_scene_sample(f.ctx, 21, &scene) == TL_OK);
    REQUIRE(tl_scene_set_resolution(f.ctx, scene, 16, 16) == TL_OK);

    tl_image* observed = nullptr;
    REQUIRE(tl_render_direct(f.ctx, scene, &observed) == TL_OK);
    tl_image *depth = nullptr, *normal = nullptr, *rough = nullptr, *mask = nullptr;
    REQUIRE(tl_rasterize_gbuffer(f.ctx, scene, &depth, &normal, &rough, &mask) == TL_OK);

    char* report = nullptr;
    tl_image* rerender = nullptr;
    tl_status s = tl_fit_direct(f.ctx, scene, observed, mask, "{\"steps\": 30, \"lr\": 0.002}",
                                &report, &rerender);
    REQUIRE(s == TL_OK);
    CHECK(std::string(report).find("loss_trace") != std::string::npos);
    CHECK(tl_image_width(rerender) == 16);
    tl_string_free(report);
    tl_image_destroy(rerender);
    tl_image_destroy(observed);
    tl_image_destroy(depth);
    tl_image_destroy(normal);
    tl_image_destroy(rough);
    tl_image_destroy(mask);
    tl_scene_destroy(scene);
}
