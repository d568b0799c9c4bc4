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

#include "transluce/synth.hpp"

#include <filesystem>
#include <fstream>

#include "transluce/direct.hpp"
#include "transluce/io.hpp"

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace transluce {

namespace {

double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.next_double();
}

Vec3 uniform_sphere_dir(Rng& rng) {
    double z = 1.0 - 2.0 * rng.next_double();
    return spherical_direction(z, kTwoPi * rng.next_double());
}

SssParams sample_sss(Rng& rng, const ParamRanges& ranges) {
    SssParams out;
    for (int c = 0; c < 3; ++c) out.sigma_t[c] = uniform_in(rng, ranges.sigma_t_lo, ranges.sigma_t_hi);
    for (int c = 0; c < 3; ++c) out.alpha[c] = uniform_in(rng, ranges.alpha_lo, ranges.alpha_hi);
    out.g = uniform_in(rng, ranges.g_lo, ranges.g_hi);
    return out;
}

}  // namespace

Image make_noise_texture(int size, uint64_t seed, int octaves) {
    Image tex(size, size, 1);
    auto lattice = [&](int octave, int x, int y) {
        uint64_t h = mix64(seed ^ (uint64_t(octave) << 40) ^ (uint64_t(uint32_t(x)) << 20) ^
                           uint64_t(uint32_t(y)));
        return double(h >> 11) * 0x1.0p-53;
    };
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double v = 0.0, amp = 1.0, amp_sum = 0.0;
            for (int o = 0; o < octaves; ++o) {
                int cells = 4 << o;
                double fx = double(x) / size * cells;
                double fy = double(y) / size * cells;
                int x0 = int(fx), y0 = int(fy);
                double tx = smooth(fx - x0), ty = smooth(fy - y0);
                // lattice wraps so the texture tiles
                auto l = [&](int xi, int yi) { return lattice(o, xi % cells, yi % cells); };
                double n = l(x0, y0) * (1 - tx) * (1 - ty) + l(x0 + 1, y0) * tx * (1 - ty) +
                           l(x0, y0 + 1) * (1 - tx) * ty + l(x0 + 1, y0 + 1) * tx * ty;
                v += amp * n;
                amp_sum += amp;
                amp *= 0.5;
            }
            tex.at(x, y) = float(0.1 + 0.8 * (v / amp_sum));
        }
    }
    return tex;
}

SceneSpec sample_scene(uint64_t seed, const AssetCatalog& catalog, const ParamRanges& ranges) {
    if (!catalog.procedural_fallback && catalog.meshes.empty() && catalog.envmaps.empty())
        throw EmptyCatalogError("sample_scene: no assets and procedural fallback disabled");

    Rng rng(seed, 0x5ce4e0, 0);
    SceneSpec spec;
    spec.seed_geometry = mix64(seed ^ 0x67656f6dULL);
    spec.seed_illumination = mix64(seed ^ 0x696c6c75ULL);
    spec.seed_render = mix64(seed ^ 0x72656e64ULL);
    spec.seed_jitter = mix64(seed ^ 0x6a697474ULL);

    // Object: user mesh when cataloged, else sphere / superquadric.
    if (!catalog.meshes.empty()) {
        spec.object_kind = ObjectKind::Mesh;
        spec.mesh_path = catalog.meshes[rng.next_below(uint32_t(catalog.meshes.size()))];
    } else if (rng.next_double() < 0.35) {
        spec.object_kind = ObjectKind::Sphere;
        spec.sphere_radius = uniform_in(rng, 0.15, 0.25);
    } else {
        spec.object_kind = ObjectKind::Superquadric;
        spec.sq_e1 = uniform_in(rng, 0.5, 1.5);
        spec.sq_e2 = uniform_in(rng, 0.5, 1.5);
        spec.sq_radii = {uniform_in(rng, 0.12, 0.25), uniform_in(rng, 0.12, 0.25),
                         uniform_in(rng, 0.12, 0.25)};
    }
    // All objects live in the 50 cm cube convention: random rotation, a
    // mild scale wobble, and a small translation around the origin.
    spec.rotate_axis = uniform_sphere_dir(rng);
    spec.rotate_angle = kTwoPi * rng.next_double();
    spec.scale = uniform_in(rng, 0.75, 1.0);
    spec.translate = {uniform_in(rng, -0.04, 0.04), uniform_in(rng, -0.04, 0.04),
                      uniform_in(rng, -0.04, 0.04)};

    if (!catalog.rough_maps.empty()) {
        spec.rough_is_texture = true;
        spec.rough_texture_path =
            catalog.rough_maps[rng.next_below(uint32_t(catalog.rough_maps.size()))];
    } else {
        spec.rough_is_texture = rng.next_double() < 0.7;
        spec.rough_constant = uniform_in(rng, 0.05, 1.0);
    }
    spec.rough_resize = uniform_in(rng, 0.5, 2.0);
    spec.rough_noise_seed = mix64(seed ^ 0x726f7567ULL);

    if (!catalog.envmaps.empty())
        spec.envmap_path = catalog.envmaps[rng.next_below(uint32_t(catalog.envmaps.size()))];
    spec.env_yaw = kTwoPi * rng.next_double();
    spec.env_seed = mix64(seed ^ 0x656e76ULL);

    spec.sss = sample_sss(rng, ranges);
    spec.flash_radiance = uniform_in(rng, ranges.flash_lo, ranges.flash_hi);
    spec.camera = Camera{};
    return spec;
}

namespace {

Sh3x9 procedural_env_sh(uint64_t seed) {
    Rng rng(seed, 0xe4au, 0);
    Sh3x9 sh{};
    double base = 0.8 + 1.2 * rng.next_double();
    for (int c = 0; c < 3; ++c) {
        sh[c][0] = base * (0.85 + 0.3 * rng.next_double());
        for (int j = 1; j < 9; ++j) sh[c][j] = 0.55 * (2.0 * rng.next_double() - 1.0);
    }
    return sh;
}

Image load_roughness_texture(const std::string& path) {
    fs::path p(path);
    Image tex = p.extension() == ".png" ? read_png(path) : read_pfm(path);
    if (tex.channels == 3) {
        Image gray(tex.width, tex.height, 1);
        for (int y = 0; y < tex.height; ++y)
            for (int x = 0; x < tex.width; ++x) {
                Spectrum v = tex.pixel(x, y);
                gray.at(x, y) = float(v.mean());
            }
        return gray;
    }
    return tex;
}

}  // namespace

EnvMap realize_envmap(const SceneSpec& spec) {
    EnvMap env;
    if (!spec.envmap_path.empty()) {
        env.image = read_pfm(spec.envmap_path);
    } else {
        env = synthesize_envmap(procedural_env_sh(spec.env_seed), 64, 0.0);
    }
    env.yaw = spec.env_yaw;
    env.validate();
    return env;
}

VolumeScene build_volume_scene(const SceneSpec& spec) {
    VolumeScene scene;
    switch (spec.object_kind) {
        case ObjectKind::Sphere:
            scene.geometry = Sphere{spec.translate, spec.sphere_radius * spec.scale};
            break;
        case ObjectKind::Superquadric: {
            TriangleMesh mesh = make_superquadric(spec.sq_radii, spec.sq_e1, spec.sq_e2);
            transform_mesh(mesh, spec.rotate_axis, spec.rotate_angle, spec.scale, spec.translate);
            scene.geometry = std::move(mesh);
            break;
        }
        case ObjectKind::Mesh: {
            fs::path p(spec.mesh_path);
            TriangleMesh mesh = p.extension() == ".stl" ? load_stl(spec.mesh_path)
                                                        : load_obj(spec.mesh_path);
            fit_to_cube(mesh, 0.5);
            transform_mesh(mesh, spec.rotate_axis, spec.rotate_angle, spec.scale, spec.translate);
            if (!mesh.watertight)
                throw NotWatertightError("scene '" + spec.id + "': mesh is not watertight: " +
                                         spec.mesh_path);
            scene.geometry = std::move(mesh);
            break;
        }
    }

    if (spec.rough_is_texture) {
        scene.rough.texture = spec.rough_texture_path.empty()
                                  ? make_noise_texture(128, spec.rough_noise_seed)
                                  : load_roughness_texture(spec.rough_texture_path);
        scene.rough.texture_scale = spec.rough_resize;
    } else {
        scene.rough.constant = spec.rough_constant;
    }

    scene.sss = spec.sss;
    scene.env = EnvLight::make_map(realize_envmap(spec));
    scene.flash = FlashLight::for_camera(spec.camera, spec.flash_radiance);
    scene.camera = spec.camera;
    return scene;
}

ScenePackage synth_scene(const SceneSpec& spec, const TraceConfig& cfg,
                         const std::optional<std::array<SssParams, 3>>& alter_override,
                         double jitter_deg) {
    ScenePackage pkg;
    pkg.spec = spec;

    VolumeScene scene = build_volume_scene(spec);

    TraceConfig run = cfg;
    run.seed = spec.seed_render;
    render_scene_pair(scene, run, jitter_deg, spec.seed_jitter, pkg.flash, pkg.noflash);

    // Altered images: same shape/reflectance/illumination/camera, SSS
    // re-drawn from the full dataset ranges.
    ParamRanges ranges;
    Rng alter_rng(spec.seed_illumination, 0xa17e4ull & 0xffff, 1);
    for (int k = 0; k < kAlteredImagesPerScene; ++k) {
        SssParams drawn = alter_override ? (*alter_override)[size_t(k)]
                                         : sample_sss(alter_rng, ranges);
        pkg.alter_params[size_t(k)] = drawn;
        VolumeScene altered = scene;
        altered.sss = drawn;
        TraceConfig acfg = cfg;
        acfg.seed = mix64(spec.seed_render ^ (0xa17e400ULL + uint64_t(k)));
        pkg.altered[size_t(k)] = trace(altered, acfg);
    }

    pkg.gt = rasterize_gbuffer(scene, spec.camera);
    pkg.sh_gt = project_envmap(realize_envmap(spec), 200000, spec.seed_illumination, cfg.threads);
    return pkg;
}

std::vector<TrainingTuple> emit_training_tuples(const ScenePackage& pkg, const Camera& camera,
                                                int threads) {
    Illumination illum;
    illum.sh = pkg.sh_gt;
    illum.flash_intensity = pkg.spec.flash_radiance;
    Image i_d = render_direct(pkg.gt, illum, camera, threads);

    Image background = pkg.flash;
    for (int y = 0; y < background.height; ++y)
        for (int x = 0; x < background.width; ++x)
            if (pkg.gt.masked(x, y))
                for (int c = 0; c < 3; ++c) background.at(x, y, c) = 0.0f;

    std::vector<TrainingTuple> out;
    for (int k = 0; k <= kAlteredImagesPerScene; ++k) {
        TrainingTuple t;
        t.i_d = i_d;
        t.background = background;
        t.sh = pkg.sh_gt;
        t.flash_intensity = pkg.spec.flash_radiance;
        t.sss = k == 0 ? pkg.spec.sss : pkg.alter_params[size_t(k - 1)];
        t.target_index = k;
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

json spectrum_json(const Spectrum& s) { return json::array({s.r, s.g, s.b}); }
Spectrum spectrum_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

json sss_json(const SssParams& s) {
    return {{"sigma_t", spectrum_json(s.sigma_t)}, {"alpha", spectrum_json(s.alpha)}, {"g", s.g}};
}

SssParams sss_from(const json& j) {
    SssParams s;
    s.sigma_t = spectrum_from(j.at("sigma_t"));
    s.alpha = spectrum_from(j.at("alpha"));
    s.g = j.at("g");
    return s;
}

json sh_json(const Sh3x9& sh) {
    json rows = json::array();
    for (int c = 0; c < 3; ++c) {
        json row = json::array();
        for (int k = 0; k < 9; ++k) row.push_back(sh[c][k]);
        rows.push_back(row);
    }
    return rows;
}

Sh3x9 sh_from(const json& j) {
    Sh3x9 sh{};
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 9; ++k) sh[c][k] = j.at(c).at(k);
    return sh;
}

json camera_json(const Camera& c) {
    return {{"position", vec3_json(c.position)}, {"look_at", vec3_json(c.look_at)},
            {"up", vec3_json(c.up)},             {"vertical_fov", c.vertical_fov},
            {"width", c.width},                  {"height", c.height}};
}

Camera camera_from(const json& j) {
    Camera c;
    c.position = vec3_from(j.at("position"));
    c.look_at = vec3_from(j.at("look_at"));
    c.up = vec3_from(j.at("up"));
    c.vertical_fov = j.at("vertical_fov");
    c.width = j.at("width");
    c.height = j.at("height");
    return c;
}

const char* object_kind_name(ObjectKind k) {
    switch (k) {
        case ObjectKind::Sphere: return "sphere";
        case ObjectKind::Superquadric: return "superquadric";
        case ObjectKind::Mesh: return "mesh";
    }
    return "?";
}

ObjectKind object_kind_from(const std::string& s) {
    if (s == "sphere") return ObjectKind::Sphere;
    if (s == "superquadric") return ObjectKind::Superquadric;
    if (s == "mesh") return ObjectKind::Mesh;
    throw SchemaError("unknown object kind: " + s);
}

}  // namespace

json spec_to_json(const SceneSpec& spec) {
    return {{"id", spec.id},
            {"object",
             {{"kind", object_kind_name(spec.object_kind)},
              {"mesh_path", spec.mesh_path},
              {"sphere_radius", spec.sphere_radius},
              {"sq_e1", spec.sq_e1},
              {"sq_e2", spec.sq_e2},
              {"sq_radii", vec3_json(spec.sq_radii)},
              {"rotate_axis", vec3_json(spec.rotate_axis)},
              {"rotate_angle", spec.rotate_angle},
              {"scale", spec.scale},
              {"translate", vec3_json(spec.translate)}}},
            {"roughness",
             {{"is_texture", spec.rough_is_texture},
              {"constant", spec.rough_constant},
              {"texture_path", spec.rough_texture_path},
              {"resize", spec.rough_resize},
              {"noise_seed", spec.rough_noise_seed}}},
            {"environment",
             {{"path", spec.envmap_path}, {"yaw", spec.env_yaw}, {"seed", spec.env_seed}}},
            {"sss", sss_json(spec.sss)},
            {"flash_radiance", spec.flash_radiance},
            {"seeds",
             {{"geometry", spec.seed_geometry},
              {"illumination", spec.seed_illumination},
              {"render", spec.seed_render},
              {"jitter", spec.seed_jitter}}},
            {"camera", camera_json(spec.camera)}};
}

SceneSpec spec_from_json(const json& j) {
    SceneSpec spec;
    spec.id = j.value("id", "");
    const json& obj = j.at("object");
    spec.object_kind = object_kind_from(obj.at("kind"));
    spec.mesh_path = obj.value("mesh_path", "");
    spec.sphere_radius = obj.value("sphere_radius", 0.25);
    spec.sq_e1 = obj.value("sq_e1", 1.0);
    spec.sq_e2 = obj.value("sq_e2", 1.0);
    if (obj.contains("sq_radii")) spec.sq_radii = vec3_from(obj.at("sq_radii"));
    if (obj.contains("rotate_axis")) spec.rotate_axis = vec3_from(obj.at("rotate_axis"));
    spec.rotate_angle = obj.value("rotate_angle", 0.0);
    spec.scale = obj.value("scale", 1.0);
    if (obj.contains("translate")) spec.translate = vec3_from(obj.at("translate"));
    const json& rough = j.at("roughness");
    spec.rough_is_texture = rough.value("is_texture", false);
    spec.rough_constant = rough.value("constant", 0.1);
    spec.rough_texture_path = rough.value("texture_path", "");
    spec.rough_resize = rough.value("resize", 1.0);
    spec.rough_noise_seed = rough.value("noise_seed", uint64_t(0));
    const json& env = j.at("environment");
    spec.envmap_path = env.value("path", "");
    spec.env_yaw = env.value("yaw", 0.0);
    spec.env_seed = env.value("seed", uint64_t(0));
    spec.sss = sss_from(j.at("sss"));
    spec.flash_radiance = j.at("flash_radiance");
    const json& seeds = j.at("seeds");
    spec.seed_geometry = seeds.value("geometry", uint64_t(0));
    spec.seed_illumination = seeds.value("illumination", uint64_t(0));
    spec.seed_render = seeds.value("render", uint64_t(0));
    spec.seed_jitter = seeds.value("jitter", uint64_t(0));
    spec.camera = camera_from(j.at("camera"));
    return spec;
}

namespace {

const char* const kImageFiles[] = {"flash.pfm",  "noflash.pfm", "alter0.pfm", "alter1.pfm",
                                   "alter2.pfm", "depth.pfm",   "normal.pfm", "rough.pfm"};

json file_entry(const fs::path& dir, const std::string& name) {
    return {{"path", name}, {"crc32", file_crc32((dir / name).string())}};
}

}  // namespace

void write_package(const ScenePackage& pkg, const std::string& dir) {
    fs::create_directories(dir);
    fs::path d(dir);
    write_pfm(pkg.flash, (d / "flash.pfm").string());
    write_pfm(pkg.noflash, (d / "noflash.pfm").string());
    for (int k = 0; k < kAlteredImagesPerScene; ++k)
        write_pfm(pkg.altered[size_t(k)], (d / ("alter" + std::to_string(k) + ".pfm")).string());
    write_pfm(pkg.gt.depth, (d / "depth.pfm").string());
    write_pfm(pkg.gt.normal, (d / "normal.pfm").string());
    write_pfm(pkg.gt.rough, (d / "rough.pfm").string());
    write_png(pkg.gt.mask, (d / "mask.png").string());

    json manifest;
    manifest["schema_version"] = kManifestSchemaVersion;
    manifest["scene"] = spec_to_json(pkg.spec);
    manifest["sh_gt"] = sh_json(pkg.sh_gt);
    json alter = json::array();
    for (const SssParams& a : pkg.alter_params) alter.push_back(sss_json(a));
    manifest["alter_params"] = alter;
    json files;
    for (const char* name : kImageFiles) files[name] = file_entry(d, name);
    files["mask.png"] = file_entry(d, "mask.png");
    manifest["files"] = files;

    std::ofstream out(d / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("write_package: cannot write manifest in " + dir);
}

ScenePackage read_package(const std::string& dir) {
    fs::path d(dir);
    std::ifstream in(d / "manifest.json");
    if (!in) throw MissingFileError("read_package: no manifest in " + dir);
    json manifest = json::parse(in, nullptr, /*allow_exceptions=*/true);
    int version = manifest.at("schema_version");
    if (version != kManifestSchemaVersion)
        throw SchemaVersionMismatchError("read_package: unsupported schema version " +
                                         std::to_string(version));
    for (const auto& [name, entry] : manifest.at("files").items()) {
        fs::path p = d / entry.at("path").get<std::string>();
        if (!fs::exists(p)) throw MissingFileError("read_package: missing " + p.string());
        uint32_t crc = file_crc32(p.string());
        if (crc != entry.at("crc32").get<uint32_t>())
            throw ChecksumMismatchError("read_package: checksum mismatch for " + p.string());
    }

    ScenePackage pkg;
    pkg.spec = spec_from_json(manifest.at("scene"));
    pkg.sh_gt = sh_from(manifest.at("sh_gt"));
    for (int k = 0; k < kAlteredImagesPerScene; ++k)
        pkg.alter_params[size_t(k)] = sss_from(manifest.at("alter_params").at(k));
    pkg.flash = read_pfm((d / "flash.pfm").string());
    pkg.noflash = read_pfm((d / "noflash.pfm").string());
    for (int k = 0; k < kAlteredImagesPerScene; ++k)
        pkg.altered[size_t(k)] = read_pfm((d / ("alter" + std::to_string(k) + ".pfm")).string());
    pkg.gt.depth = read_pfm((d / "depth.pfm").string());
    pkg.gt.normal = read_pfm((d / "normal.pfm").string());
    pkg.gt.rough = read_pfm((d / "rough.pfm").string());
    Image mask = read_png((d / "mask.png").string());
    pkg.gt.mask = Image(mask.width, mask.height, 1);
    for (size_t i = 0; i < mask.data.size(); ++i)
        pkg.gt.mask.data[i] = mask.data[i] > 0.5f ? 1.0f : 0.0f;
    return pkg;
}

void validate_package(const ScenePackage& pkg, const ParamRanges& ranges) {
    auto in_range = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    auto check_sss = [&](const SssParams& s, const char* what) {
        for (int c = 0; c < 3; ++c) {
            if (!in_range(s.sigma_t[c], ranges.sigma_t_lo, ranges.sigma_t_hi))
                throw OutOfRangeError(std::string(what) + ".sigma_t", s.sigma_t[c]);
            if (!in_range(s.alpha[c], ranges.alpha_lo, ranges.alpha_hi))
                throw OutOfRangeError(std::string(what) + ".alpha", s.alpha[c]);
        }
        if (!in_range(s.g, ranges.g_lo, ranges.g_hi))
            throw OutOfRangeError(std::string(what) + ".g", s.g);
    };
    check_sss(pkg.spec.sss, "sss");
    for (const SssParams& a : pkg.alter_params) check_sss(a, "alter");
    if (!in_range(pkg.spec.flash_radiance, ranges.flash_lo, ranges.flash_hi))
        throw OutOfRangeError("flash_radiance", pkg.spec.flash_radiance);

    const Image* images[] = {&pkg.flash, &pkg.noflash, &pkg.altered[0], &pkg.altered[1],
                             &pkg.altered[2]};
    for (const Image* img : images) {
        if (!img->same_shape(pkg.flash)) throw ShapeMismatchError("package images disagree");
        if (!img->all_finite()) throw InvalidArgumentError("package image has non-finite values");
    }
    for (const SssParams& a : pkg.alter_params) {
        bool differs = a.g != pkg.spec.sss.g;
        for (int c = 0; c < 3; ++c)
            differs = differs || a.sigma_t[c] != pkg.spec.sss.sigma_t[c] ||
                      a.alpha[c] != pkg.spec.sss.alpha[c];
        if (!differs) throw InvalidArgumentError("alter_params equal the scene parameters");
    }
    pkg.gt.validate();
    for (double c : {pkg.sh_gt[0][0], pkg.sh_gt[1][0], pkg.sh_gt[2][0]})
        if (!std::isfinite(c)) throw InvalidArgumentError("sh_gt not finite");
}

uint64_t corpus_scene_seed(uint64_t master_seed, int scene_index) {
    return mix64(master_seed ^ (0x9e3779b97f4a7c15ULL * uint64_t(scene_index + 1)));
}

namespace {

std::string scene_id_of(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene-%04d", index);
    return buf;
}

ScenePackage synth_from_corpus_entry(const json& entry, const CorpusOptions& options) {
    uint64_t seed = entry.at("seed");
    AssetCatalog catalog = options.catalog;
    SceneSpec spec = sample_scene(seed, catalog);
    spec.id = entry.at("id");
    spec.camera.width = options.resolution;
    spec.camera.height = options.resolution;
    TraceConfig cfg = options.trace;
    cfg.threads = options.threads;
    return synth_scene(spec, cfg, {}, options.jitter_deg);
}

}  // namespace

CorpusReport build_corpus(int n_scenes, const std::string& out_dir, uint64_t master_seed,
                          const CorpusOptions& options) {
    if (n_scenes < 1) throw InvalidArgumentError("build_corpus: n_scenes must be >= 1");
    fs::create_directories(out_dir);

    CorpusReport report;
    report.requested = n_scenes;

    json scenes = json::array();
    for (int i = 0; i < n_scenes; ++i) {
        std::string id = scene_id_of(i);
        uint64_t seed = corpus_scene_seed(master_seed, i);
        json entry = {{"id", id}, {"index", i}, {"seed", seed}};
        try {
            ScenePackage pkg = synth_from_corpus_entry(entry, options);
            std::string dir = (fs::path(out_dir) / id).string();
            write_package(pkg, dir);
            if (options.emit_tuples) {
                auto tuples = emit_training_tuples(pkg, pkg.spec.camera, options.threads);
                write_pfm(tuples[0].i_d, (fs::path(dir) / "i_d.pfm").string());
                write_pfm(tuples[0].background, (fs::path(dir) / "background.pfm").string());
            }
            report.scene_ids.push_back(id);
            scenes.push_back(entry);
        } catch (const Error& e) {
            report.failed.push_back(id + ": " + e.what());
        }
    }

    json manifest;
    manifest["schema_version"] = kManifestSchemaVersion;
    manifest["master_seed"] = master_seed;
    manifest["count"] = int(report.scene_ids.size());
    manifest["requested"] = n_scenes;
    manifest["resolution"] = options.resolution;
    manifest["spp"] = options.trace.spp;
    manifest["max_bounces"] = options.trace.max_bounces;
    manifest["rr_start"] = options.trace.rr_start;
    manifest["jitter_deg"] = options.jitter_deg;
    manifest["emit_tuples"] = options.emit_tuples;
    json catalog;
    catalog["meshes"] = options.catalog.meshes;
    catalog["rough_maps"] = options.catalog.rough_maps;
    catalog["envmaps"] = options.catalog.envmaps;
    manifest["catalog"] = catalog;
    manifest["scenes"] = scenes;
    json failed = json::array();
    for (const std::string& f : report.failed) failed.push_back(f);
    manifest["failed"] = failed;
    std::ofstream out(fs::path(out_dir) / "corpus.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("build_corpus: cannot write corpus manifest");
    return report;
}

ScenePackage regenerate_scene(const std::string& corpus_dir, const std::string& scene_id,
                              const std::string& out_dir) {
    std::ifstream in(fs::path(corpus_dir) / "corpus.json");
    if (!in) throw MissingFileError("regenerate_scene: no corpus.json in " + corpus_dir);
    json manifest = json::parse(in);
    if (manifest.at("schema_version").get<int>() != kManifestSchemaVersion)
        throw SchemaVersionMismatchError("regenerate_scene: unsupported corpus schema");

    CorpusOptions options;
    options.resolution = manifest.at("resolution");
    options.trace.spp = manifest.at("spp");
    options.trace.max_bounces = manifest.value("max_bounces", 64);
    options.trace.rr_start = manifest.value("rr_start", 8);
    options.jitter_deg = manifest.at("jitter_deg");
    options.emit_tuples = manifest.value("emit_tuples", false);
    if (manifest.contains("catalog")) {
        const json& cat = manifest.at("catalog");
        options.catalog.meshes = cat.at("meshes").get<std::vector<std::string>>();
        options.catalog.rough_maps = cat.at("rough_maps").get<std::vector<std::string>>();
        options.catalog.envmaps = cat.at("envmaps").get<std::vector<std::string>>();
    }

    for (const json& entry : manifest.at("scenes")) {
        if (entry.at("id") != scene_id) continue;
        ScenePackage pkg = synth_from_corpus_entry(entry, options);
        std::string dir = out_dir.empty() ? (fs::path(corpus_dir) / scene_id).string() : out_dir;
        write_package(pkg, dir);
        return pkg;
    }
    throw MissingFileError("regenerate_scene: id not in corpus: " + scene_id);
}

}  // namespace transluce
