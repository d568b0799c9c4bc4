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

#include <vector>

#include "transluce/params.hpp"
#include "transluce/rng.hpp"
#include "transluce/sh.hpp"
#include "transluce/types.hpp"

namespace transluce {

// Screen-space direct-illumination shading from a GBuffer under SH + flash
// lighting, with analytic gradients for every optimizable parameter.
//
// Shading model (closed form, deterministic):
//   flash   i * pi*r_flash^2 * f_r(w_flash, w_view) * max(n.w_flash,0)/d^2
//           (the sphere emitter collapsed to a point of matching intensity)
//   sh      diffuse transport: (1 - F0)/pi * irradiance(sh, n), plus a
//           specular lobe: F(n.w_view) * sum_j damp_l(rough) c_j Y_j(mirror)
//           with damp_l = exp(-l(l+1) rough^2)
// Final radiance is clamped at 0 per channel; unmasked pixels are 0.

/// The flash sphere sits 10 cm behind the camera along the view axis.
constexpr double kFlashBackoff = 0.10;
constexpr double kFlashRadius = 0.10;

/// Per-pixel shading inputs where mask = 1.
struct ShadingContext {
    Vec3 position;        // world, reconstructed from depth
    Vec3 normal;          // world space, unit
    double rough = 1.0;
    bool masked = false;
    Vec3 view_dir;        // toward the camera, unit
    Vec3 flash_dir;       // toward the flash center, unit
    double flash_falloff = 0.0;  // 1/dist^2 to the flash center
};

/// Unit ray direction through the center of pixel (px, py).
Vec3 camera_ray_dir(const Camera& camera, double px, double py);

/// World position of every pixel: camera origin + ray * depth.
std::vector<Vec3> unproject(const Image& depth, const Camera& camera);

/// Pinhole projection back to continuous pixel coordinates.
void project_point(const Camera& camera, const Vec3& world, double& px, double& py);

/// Flash emitter center for a camera.
Vec3 flash_center(const Camera& camera);

/// Shading contexts for all pixels (meaningful where mask = 1).
std::vector<ShadingContext> make_shading_contexts(const GBuffer& g, const Camera& camera);

/// Deterministic closed-form render. Throws MaskEmptyError when the mask is
/// all zero.
Image render_direct(const GBuffer& g, const Illumination& illum, const Camera& camera,
                    int threads = 1);

/// Double-precision pixel buffer (3ch row-major) used by gradient checks.
/// `validate` = false skips GBuffer validation so finite-difference probes
/// may perturb rasters slightly out of spec.
std::vector<double> render_direct_fp64(const GBuffer& g, const Illumination& illum,
                                       const Camera& camera, bool validate = true,
                                       int threads = 1);

struct DirectGrads {
    GradVector grads;        // normalized space: [rough raster, sh, i, 0, 0, 0]
    Image d_depth;           // physical d<adjoint,image>/d depth, 1ch
    Image d_normal;          // physical, camera-space components, 3ch
    std::vector<uint8_t> kink_mask;  // per pixel: 1 near a clamp boundary
};

/// Exact reverse-mode gradients of <adjoint, render_direct>. Gradients for
/// ParamVector entries are reported in normalized space via `ranges`;
/// depth/normal raster gradients stay physical. Shared-parameter sums use a
/// fixed tile order, so results are bit-stable across thread counts.
DirectGrads backward_direct(const GBuffer& g, const Illumination& illum, const Camera& camera,
                            const Image& adjoint, const ParamRanges& ranges, int threads = 1);

/// Central finite differences of <adjoint, image> for every ParamVector
/// scalar (step in normalized space). Shading is pixel-local, so the two
/// raster probes batch all pixels at once; sh and flash go scalar by scalar.
GradVector finite_diff_grads(const GBuffer& g, const Illumination& illum, const Camera& camera,
                             const Image& adjoint, double step, const ParamRanges& ranges,
                             int threads = 1);

/// Physical-space central differences for the depth / normal rasters
/// (batched over pixels), for validating DirectGrads raster outputs.
void finite_diff_raster_grads(const GBuffer& g, const Illumination& illum, const Camera& camera,
                              const Image& adjoint, double step, Image& d_depth, Image& d_normal,
                              int threads = 1);

/// render_direct under substituted illumination.
Image relight(const GBuffer& g, const Illumination& new_illum, const Camera& camera,
              int threads = 1);

/// Smooth random scene for gradient validation: blob-like depth/normals,
/// noise roughness, random order-2 lighting.
void make_random_direct_scene(int res, uint64_t seed, GBuffer& g, Illumination& illum,
                              Camera& camera);

struct GradCheckResult {
    std::array<double, kParamGroupCount> max_rel_err{};
    int kink_pixels = 0;
    bool pass(double tol) const {
        for (double e : max_rel_err)
            if (!(e < tol)) return false;
        return true;
    }
};

/// backward_direct vs finite_diff_grads on one random scene. Kink-adjacent
/// pixels are masked out of the adjoint before both sides run.
GradCheckResult gradcheck_scene(int res, uint64_t seed, double step, const ParamRanges& ranges,
                                int threads = 1);

}  // namespace transluce
