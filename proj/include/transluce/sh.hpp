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

#include <array>
#include <cstdint>

#include "transluce/types.hpp"

namespace transluce {

using Sh9 = std::array<double, 9>;
using Sh3x9 = std::array<std::array<double, 9>, 3>;

/// Equirectangular latitude-longitude radiance map, rotated about the
/// vertical (+y) axis by `yaw` before lookup. width must be 2*height.
struct EnvMap {
    Image image;   // 3ch, values >= 0
    double yaw = 0.0;

    void validate() const;

    /// Bilinear lookup of the radiance arriving from `dir` (unit vector).
    Spectrum eval(const Vec3& dir) const;
};

/// Real orthonormal SH basis Y_l^m for l <= 2 without Condon-Shortley signs,
/// in the fixed order (Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22).
/// `dir` must be unit length within 1e-6.
Sh9 sh_basis(const Vec3& dir);

/// Projects an environment map onto the 3x9 basis: c_i = ∫ L(ω) Y_i(ω) dω,
/// estimated with stratified uniform-sphere Monte Carlo. Deterministic given
/// the seed; a shared (n_samples, seed) pair yields a common sample set, so
/// projection is exactly linear in the map.
Sh3x9 project_envmap(const EnvMap& env, int64_t n_samples, uint64_t seed, int threads = 1);

/// Radiance reconstruction Σ c_i Y_i(dir) per channel. May be negative
/// (ringing); callers clamp at use sites.
Spectrum eval_sh_radiance(const Sh3x9& sh, const Vec3& dir);

/// Cosine-convolved irradiance Σ A_l c_i Y_i(n) with A = (π, 2π/3, π/4),
/// clamped at 0 from below.
Spectrum sh_irradiance(const Sh3x9& sh, const Vec3& normal);

/// Band factors for the irradiance convolution, indexed by basis slot.
double sh_irradiance_band_factor(int basis_index);

/// Synthesizes an equirectangular image from SH coefficients, clamping the
/// reconstruction at `floor` from below (environment radiance cannot be
/// negative).
EnvMap synthesize_envmap(const Sh3x9& sh, int height, double floor = 0.0);

}  // namespace transluce
