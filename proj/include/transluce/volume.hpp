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

#include "transluce/geometry.hpp"
#include "transluce/rng.hpp"
#include "transluce/sh.hpp"
#include "transluce/types.hpp"

namespace transluce {

// Monte Carlo volumetric path tracer: rough dielectric interface around a
// homogeneous scattering interior. Paths start at the camera; radiance
// throughput therefore carries the (eta_prev/eta_next)^2 solid-angle
// compression factor on every refraction. Spectral extinction uses
// hero-channel free-flight sampling with 3-channel balance-heuristic MIS.

/// Infinite environment light. `Cone` is a hard directional cap and `Lobe`
/// a smooth (1+cos)/2 power lobe; both exist for analytic oracles.
struct EnvLight {
    enum class Kind { Constant, Sh, Map, Cone, Lobe };
    Kind kind = Kind::Constant;
    Spectrum constant{1.0, 1.0, 1.0};
    Sh3x9 sh{};
    EnvMap map;
    Vec3 axis{0.0, 0.0, -1.0};
    double cone_cos = 0.9;    // Cone: lit where dot(dir, axis) > cone_cos
    double lobe_power = 4.0;  // Lobe: constant * ((1+dot)/2)^power

    Spectrum eval(const Vec3& dir) const;

    static EnvLight make_constant(const Spectrum& L);
    static EnvLight make_sh(const Sh3x9& sh);
    static EnvLight make_map(EnvMap map);
    static EnvLight make_cone(const Vec3& axis, double cone_cos, const Spectrum& L);
    static EnvLight make_lobe(const Vec3& axis, double power, const Spectrum& L);
};

/// Sphere area emitter standing in for the camera flash: 10 cm radius,
/// centered 10 cm behind the camera.
struct FlashLight {
    Vec3 center;
    double radius = 0.10;
    double radiance = 0.0;  // W m^-2 sr^-1, uniform, double sided

    static FlashLight for_camera(const Camera& camera, double radiance);
};

enum class TraceMode {
    Full,           // complete transport
    SurfaceOnly,    // interior treated as vacuum (no medium events)
    SingleScatter,  // exactly one interior scatter, forced boundary transmission
};

struct TraceConfig {
    int spp = 64;
    int max_bounces = 64;
    uint64_t seed = 0;
    int rr_start = 8;          // Russian roulette start depth
    double eta = kDefaultIor;  // boundary IoR; 1.0 is the furnace test hook
    bool pixel_jitter = true;
    TraceMode mode = TraceMode::Full;
    int threads = 1;
    bool allow_unit_albedo = false;  // white-furnace test hook (alpha = 1)

    void validate() const {
        if (spp < 1) throw InvalidArgumentError("TraceConfig: spp must be >= 1");
        if (max_bounces < 1) throw InvalidArgumentError("TraceConfig: max_bounces must be >= 1");
    }
};

/// Roughness over the surface: constant, or a texture indexed by the
/// spherical parameterization around the object centroid.
struct RoughnessSource {
    double constant = 0.1;
    Image texture;        // optional 1ch; empty = constant
    double texture_scale = 1.0;

    bool is_texture() const { return !texture.empty(); }
    double at(const Vec3& local_dir) const;
};

struct VolumeScene {
    Geometry geometry;
    RoughnessSource rough;
    SssParams sss;
    EnvLight env;
    std::optional<FlashLight> flash;
    Camera camera;
};

/// Beer-Lambert per-channel transmittance exp(-sigma_t * d).
Spectrum transmittance(const Spectrum& sigma_t, double distance);

struct FreeFlight {
    double distance = 0.0;
    double pdf = 0.0;
};

/// d = -ln(1-u)/sigma with pdf sigma * exp(-sigma d). Throws
/// ZeroExtinctionError for sigma == 0 (callers branch to surface-only
/// transport there).
FreeFlight sample_free_flight(double sigma_t_channel, Rng& rng);

/// Renders the scene. Deterministic given cfg.seed regardless of
/// cfg.threads. When `variance_out` is non-null it receives the per-pixel
/// variance of the sample mean (3ch).
Image trace(const VolumeScene& scene, const TraceConfig& cfg, Image* variance_out = nullptr);

/// Flash/no-flash pair: the no-flash render removes the emitter and rotates
/// the look-at direction by jitter_deg around a seeded random axis.
void render_scene_pair(const VolumeScene& scene, const TraceConfig& cfg, double jitter_deg,
                       uint64_t jitter_seed, Image& flash_img, Image& noflash_img);

/// Canonical SSS visualization: radius 0.25 m sphere at the origin,
/// roughness 0.05, default camera.
Image render_sss_sphere(const SssParams& sss, const EnvLight& env, const TraceConfig& cfg);

/// Deterministic nested quadrature (n_ray Gauss-Legendre points along the
/// refracted chord x (n_cos x n_phi) direction nodes) of the exactly-one-
/// scatter transport for a smooth sphere under an analytic environment.
/// Matches trace() in TraceMode::SingleScatter. Pixels outside [x0,x1) x
/// [y0,y1) are left at 0; x1/y1 <= 0 mean the full frame.
Image single_scatter_reference(const Sphere& sphere, const SssParams& sss, const EnvLight& env,
                               const Camera& camera, int n_ray = 64, int n_cos = 16, int n_phi = 8,
                               int x0 = 0, int y0 = 0, int x1 = -1, int y1 = -1);

/// Primary-hit rasterization of GT buffers (depth along the ray, camera-
/// space normals, roughness, binary mask).
GBuffer rasterize_gbuffer(const VolumeScene& scene, const Camera& camera);

}  // namespace transluce
