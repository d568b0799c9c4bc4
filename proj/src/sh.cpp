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

#include "transluce/sh.hpp"

#include <mutex>

#include "transluce/parallel.hpp"
#include "transluce/rng.hpp"

namespace transluce {

void EnvMap::validate() const {
    if (image.empty()) throw EmptyEnvMapError("EnvMap: zero pixels");
    if (image.channels != 3) throw InvalidArgumentError("EnvMap: must be 3-channel");
    if (image.width != 2 * image.height)
        throw InvalidArgumentError("EnvMap: width must be 2*height (equirectangular)");
    for (float v : image.data)
        if (!(v >= 0.0f) || !std::isfinite(v))
            throw InvalidArgumentError("EnvMap: negative or non-finite radiance");
}

// Direction convention: +y is the vertical axis (up). phi measured in the
// xz plane, u wraps in phi, v runs from the +y pole (v=0) to the -y pole.
Spectrum EnvMap::eval(const Vec3& dir) const {
    const int w = image.width, h = image.height;
    double phi = std::atan2(dir.z, dir.x) - yaw;
    double theta = std::acos(clamp(dir.y, -1.0, 1.0));
    double u = phi / kTwoPi;
    u -= std::floor(u);
    double v = theta / kPi;

    // Bilinear with phi wrap-around and clamped poles.
    double fx = u * w - 0.5;
    double fy = v * h - 0.5;
    int x0 = int(std::floor(fx));
    int y0 = int(std::floor(fy));
    double tx = fx - x0;
    double ty = fy - y0;
    auto wrap_x = [&](int x) { return ((x % w) + w) % w; };
    auto clamp_y = [&](int y) { return clamp(y, 0, h - 1); };
    int x1 = x0 + 1, y1 = y0 + 1;
    Spectrum c00 = image.pixel(wrap_x(x0), clamp_y(y0));
    Spectrum c10 = image.pixel(wrap_x(x1), clamp_y(y0));
    Spectrum c01 = image.pixel(wrap_x(x0), clamp_y(y1));
    Spectrum c11 = image.pixel(wrap_x(x1), clamp_y(y1));
    return c00 * ((1 - tx) * (1 - ty)) + c10 * (tx * (1 - ty)) + c01 * ((1 - tx) * ty) +
           c11 * (tx * ty);
}

namespace {

// Orthonormal real SH constants.
constexpr double kY00 = 0.28209479177387814;    // 1/(2 sqrt(pi))
constexpr double kY1 = 0.4886025119029199;      // sqrt(3/(4 pi))
constexpr double kY2od = 1.0925484305920792;    // sqrt(15/(4 pi))
constexpr double kY20 = 0.31539156525252005;    // sqrt(5/(16 pi))
constexpr double kY22 = 0.5462742152960396;     // sqrt(15/(16 pi))

}  // namespace

Sh9 sh_basis(const Vec3& dir) {
    if (!is_unit(dir)) throw NotUnitError("sh_basis: direction not unit length");
    const double x = dir.x, y = dir.y, z = dir.z;
    return {kY00,
            kY1 * y,
            kY1 * z,
            kY1 * x,
            kY2od * x * y,
            kY2od * y * z,
            kY20 * (3.0 * z * z - 1.0),
            kY2od * x * z,
            kY22 * (x * x - y * y)};
}

double sh_irradiance_band_factor(int basis_index) {
    if (basis_index == 0) return kPi;
    if (basis_index < 4) return 2.0 * kPi / 3.0;
    return kPi / 4.0;
}

Spectrum eval_sh_radiance(const Sh3x9& sh, const Vec3& dir) {
    Sh9 basis = sh_basis(dir);
    Spectrum out;
    for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int j = 0; j < 9; ++j) v += sh[c][j] * basis[j];
        out[c] = v;
    }
    return out;
}

Spectrum sh_irradiance(const Sh3x9& sh, const Vec3& normal) {
    Sh9 basis = sh_basis(normal);
    Spectrum out;
    for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int j = 0; j < 9; ++j) v += sh_irradiance_band_factor(j) * sh[c][j] * basis[j];
        out[c] = std::max(v, 0.0);
    }
    return out;
}

// Jittered equal-area stratification of the uniform sphere density. The
// strata grid depends only on n_samples, so two projections sharing
// (n_samples, seed) integrate against the identical sample set.
static Vec3 stratified_sphere_sample(int64_t index, int rows, int cols, uint64_t seed) {
    Rng rng(seed, uint64_t(index), 0x5u);
    int64_t row = index / cols;
    int64_t col = index % cols;
    double u1 = (double(row) + rng.next_double()) / rows;       // cos(theta) stratum
    double u2 = (double(col) + rng.next_double()) / cols;       // phi stratum
    double cos_theta = 1.0 - 2.0 * u1;
    double phi = kTwoPi * u2;
    double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    // y is the vertical axis.
    return {sin_theta * std::cos(phi), cos_theta, sin_theta * std::sin(phi)};
}

Sh3x9 project_envmap(const EnvMap& env, int64_t n_samples, uint64_t seed, int threads) {
    env.validate();
    if (n_samples < 1) throw InvalidArgumentError("project_envmap: n_samples must be >= 1");

    int rows = std::max(1, int(std::sqrt(double(n_samples) / 2.0)));
    int cols = std::max(1, int(n_samples / rows));
    int64_t total = int64_t(rows) * cols;

    // Per-block partial sums, reduced in fixed block order.
    constexpr int64_t kBlock = 1 << 14;
    int64_t n_blocks = (total + kBlock - 1) / kBlock;
    std::vector<std::array<double, 27>> partial(size_t(n_blocks), std::array<double, 27>{});

    parallel_for(
        n_blocks,
        [&](int64_t b) {
            std::array<double, 27> acc{};
            int64_t end = std::min(total, (b + 1) * kBlock);
            for (int64_t i = b * kBlock; i < end; ++i) {
                Vec3 dir = stratified_sphere_sample(i, rows, cols, seed);
                Spectrum radiance = env.eval(dir);
                Sh9 basis = sh_basis(dir);
                for (int c = 0; c < 3; ++c)
                    for (int j = 0; j < 9; ++j) acc[c * 9 + j] += radiance[c] * basis[j];
            }
            partial[size_t(b)] = acc;
        },
        threads);

    Sh3x9 out{};
    const double weight = kFourPi / double(total);
    for (int64_t b = 0; b < n_blocks; ++b)
        for (int c = 0; c < 3; ++c)
            for (int j = 0; j < 9; ++j) out[c][j] += partial[size_t(b)][c * 9 + j];
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 9; ++j) out[c][j] *= weight;
    return out;
}

EnvMap synthesize_envmap(const Sh3x9& sh, int height, double floor) {
    EnvMap env;
    env.image = Image(2 * height, height, 3);
    for (int y = 0; y < height; ++y) {
        double theta = (y + 0.5) / height * kPi;
        for (int x = 0; x < 2 * height; ++x) {
            double phi = (x + 0.5) / (2.0 * height) * kTwoPi;
            Vec3 dir{std::sin(theta) * std::cos(phi), std::cos(theta),
                     std::sin(theta) * std::sin(phi)};
            Spectrum L = eval_sh_radiance(sh, dir);
            env.image.set_pixel(x, y,
                                {std::max(L.r, floor), std::max(L.g, floor), std::max(L.b, floor)});
        }
    }
    return env;
}

}  // namespace transluce
