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

#include <optional>
#include <string>
#include <vector>

#include "transluce/params.hpp"
#include "transluce/volume.hpp"

namespace transluce {

constexpr int kManifestSchemaVersion = 1;
constexpr int kAlteredImagesPerScene = 3;

/// Optional user asset lists. Empty catalogs fall back to procedural assets
/// (spheres/superquadrics, value-noise roughness, SH-synthesized envmaps).
struct AssetCatalog {
    std::vector<std::string> meshes;      // .obj / .stl
    std::vector<std::string> rough_maps;  // grayscale PFM/PNG
    std::vector<std::string> envmaps;     // equirectangular PFM
    bool procedural_fallback = true;
};

enum class ObjectKind { Sphere, Superquadric, Mesh };

/// Declarative scene description; everything needed to regenerate the scene
/// bit-exactly lives here (including the seeds).
struct SceneSpec {
    std::string id;

    ObjectKind object_kind = ObjectKind::Sphere;
    std::string mesh_path;
    double sphere_radius = 0.25;
    double sq_e1 = 1.0, sq_e2 = 1.0;
    Vec3 sq_radii{0.25, 0.25, 0.25};
    Vec3 rotate_axis{0.0, 1.0, 0.0};
    double rotate_angle = 0.0;
    double scale = 1.0;
    Vec3 translate{0.0, 0.0, 0.0};

    bool rough_is_texture = true;
    double rough_constant = 0.1;
    std::string rough_texture_path;  // empty = procedural value noise
    double rough_resize = 1.0;
    uint64_t rough_noise_seed = 0;

    std::string envmap_path;  // empty = procedural SH-synthesized env
    double env_yaw = 0.0;
    uint64_t env_seed = 0;

    SssParams sss;
    double flash_radiance = 55.0;

    uint64_t seed_geometry = 0;
    uint64_t seed_illumination = 0;
    uint64_t seed_render = 0;
    uint64_t seed_jitter = 0;

    Camera camera;
};

/// One dataset scene: spec, the five rendered images, GT buffers, the SH
/// projection of the environment, and the altered-image parameters.
struct ScenePackage {
    SceneSpec spec;
    Image flash;
    Image noflash;
    std::array<Image, kAlteredImagesPerScene> altered;
    GBuffer gt;
    Sh3x9 sh_gt{};
    std::array<SssParams, kAlteredImagesPerScene> alter_params;
};

/// Neural-renderer training record: the direct-renderer image from GT
/// buffers, the conditioning parameters, the masked-out background, and
/// which package image is the target.
struct TrainingTuple {
    Image i_d;
    Image background;
    Sh3x9 sh{};
    double flash_intensity = 0.0;
    SssParams sss;               // the target image's SSS parameters
    int target_index = -1;       // 0 = flash, 1..3 = altered[k-1]
};

/// Uniform scene sampling over the dataset ranges. Deterministic per seed.
SceneSpec sample_scene(uint64_t seed, const AssetCatalog& catalog = {},
                       const ParamRanges& ranges = {});

/// Instantiates the traceable scene (geometry, roughness, env, flash).
VolumeScene build_volume_scene(const SceneSpec& spec);

/// Environment light of a spec plus an equirectangular map realization of
/// it for SH projection.
EnvMap realize_envmap(const SceneSpec& spec);

/// Renders the five images and the GT buffers. alter_override, when given,
/// replaces the random altered-image parameter draw (test hook).
ScenePackage synth_scene(const SceneSpec& spec, const TraceConfig& cfg,
                         const std::optional<std::array<SssParams, 3>>& alter_override = {},
                         double jitter_deg = 0.5);

/// Emits 1 flash + 3 altered training records for the package.
std::vector<TrainingTuple> emit_training_tuples(const ScenePackage& pkg, const Camera& camera,
                                                int threads = 1);

/// Package (de)serialization. write/read round-trip float rasters bit-exact:
/// PFM for HDR, 8-bit PNG for the mask, JSON manifest with per-file CRC32.
void write_package(const ScenePackage& pkg, const std::string& dir);
ScenePackage read_package(const std::string& dir);

/// Validates the documented package invariants (image counts and shapes,
/// parameter ranges, GT consistency); throws on violation.
void validate_package(const ScenePackage& pkg, const ParamRanges& ranges = {});

struct CorpusOptions {
    int resolution = 256;
    TraceConfig trace;
    AssetCatalog catalog;
    bool emit_tuples = false;
    double jitter_deg = 0.5;
    int threads = 1;
};

struct CorpusReport {
    int requested = 0;
    std::vector<std::string> scene_ids;
    std::vector<std::string> failed;  // "id: message"
};

/// n scene packages under out_dir plus a top-level corpus.json carrying
/// per-scene seeds for bit-exact regeneration. Failed scenes are reported,
/// successful ones kept.
CorpusReport build_corpus(int n_scenes, const std::string& out_dir, uint64_t master_seed,
                          const CorpusOptions& options);

/// Per-scene seed derivation used by build_corpus (exposed so single scenes
/// can be regenerated from the corpus manifest alone).
uint64_t corpus_scene_seed(uint64_t master_seed, int scene_index);

/// Regenerates one scene from the corpus manifest; writes it to `out_dir`
/// (defaults to its corpus directory) and returns the package.
ScenePackage regenerate_scene(const std::string& corpus_dir, const std::string& scene_id,
                              const std::string& out_dir = "");

/// Procedural value-noise roughness texture in [0.1, 0.9].
Image make_noise_texture(int size, uint64_t seed, int octaves = 4);

}  // namespace transluce
