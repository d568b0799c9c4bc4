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
#include <vector>

#include "transluce/common.hpp"
#include "transluce/errors.hpp"

namespace transluce {

/// Linear-radiometric RGB triple. Channels must stay finite; contexts decide
/// whether values are unitless ratios or W·m⁻²·sr⁻¹.
struct Spectrum {
    double r = 0.0, g = 0.0, b = 0.0;

    Spectrum() = default;
    explicit Spectrum(double v) : r(v), g(v), b(v) {}
    Spectrum(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {}

    double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    double& operator[](int i) { return i == 0 ? r : (i == 1 ? g : b); }

    Spectrum operator+(const Spectrum& o) const { return {r + o.r, g + o.g, b + o.b}; }
    Spectrum operator-(const Spectrum& o) const { return {r - o.r, g - o.g, b - o.b}; }
    Spectrum operator*(const Spectrum& o) const { return {r * o.r, g * o.g, b * o.b}; }
    Spectrum operator*(double s) const { return {r * s, g * s, b * s}; }
    Spectrum operator/(double s) const { return {r / s, g / s, b / s}; }
    Spectrum& operator+=(const Spectrum& o) {
        r += o.r;
        g += o.g;
        b += o.b;
        return *this;
    }
    Spectrum& operator*=(const Spectrum& o) {
        r *= o.r;
        g *= o.g;
        b *= o.b;
        return *this;
    }
    Spectrum& operator*=(double s) {
        r *= s;
        g *= s;
        b *= s;
        return *this;
    }

    double max_channel() const { return std::max(r, std::max(g, b)); }
    double mean() const { return (r + g + b) / 3.0; }
    bool is_finite() const { return std::isfinite(r) && std::isfinite(g) && std::isfinite(b); }
};

inline Spectrum operator*(double s, const Spectrum& c) { return c * s; }

/// Row-major float raster with 1 or 3 channels, linear radiometric values.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), data(size_t(w) * h * c, 0.0f) {
        if (w < 0 || h < 0 || (c != 1 && c != 3))
            throw InvalidArgumentError("Image: bad dimensions");
    }

    size_t pixel_count() const { return size_t(width) * height; }
    size_t value_count() const { return data.size(); }
    bool empty() const { return data.empty(); }

    float& at(int x, int y, int c = 0) { return data[(size_t(y) * width + x) * channels + c]; }
    float at(int x, int y, int c = 0) const {
        return data[(size_t(y) * width + x) * channels + c];
    }

    Spectrum pixel(int x, int y) const {
        if (channels == 1) {
            double v = at(x, y, 0);
            return Spectrum(v);
        }
        return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
    }

    void set_pixel(int x, int y, const Spectrum& s) {
        if (channels == 1) {
            at(x, y, 0) = float(s.r);
        } else {
            at(x, y, 0) = float(s.r);
            at(x, y, 1) = float(s.g);
            at(x, y, 2) = float(s.b);
        }
    }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Per-pixel geometry/material rasters parameterizing the direct renderer.
/// depth is meters along the normalized camera ray, normals are unit vectors
/// in camera space (x right, y up, z toward the camera), roughness in (0,1],
/// mask in {0,1}.
struct GBuffer {
    Image depth;    // 1ch
    Image normal;   // 3ch
    Image rough;    // 1ch
    Image mask;     // 1ch

    int width() const { return depth.width; }
    int height() const { return depth.height; }

    bool masked(int x, int y) const { return mask.at(x, y) > 0.5f; }

    /// Checks the documented invariants; throws InvalidArgumentError on the
    /// first violation.
    void validate() const;
};

/// Homogeneous scattering parameters: extinction per meter, per-channel
/// survival albedo, and the phase-function mean cosine.
struct SssParams {
    Spectrum sigma_t;   // m^-1, >= 0
    Spectrum alpha;     // [0,1)
    double g = 0.0;     // (-1,1)

    Spectrum sigma_s() const { return sigma_t * alpha; }

    void validate() const {
        for (int c = 0; c < 3; ++c) {
            if (!(sigma_t[c] >= 0.0) || !std::isfinite(sigma_t[c]))
                throw OutOfRangeError("sigma_t", sigma_t[c]);
            if (!(alpha[c] >= 0.0 && alpha[c] < 1.0))
                throw OutOfRangeError("alpha", alpha[c]);
        }
        if (!(g > -1.0 && g < 1.0)) throw OutOfRangeError("g", g);
    }
};

/// Componentwise (1-t)*a + t*b. t must lie in [0,1].
SssParams lerp_sss(const SssParams& a, const SssParams& b, double t);

/// 3x9 real SH coefficients (rows = RGB, columns = bands Y00..Y22 in the
/// repo's fixed order) plus the flash sphere-light radiance.
struct Illumination {
    std::array<std::array<double, 9>, 3> sh = {};
    double flash_intensity = 0.0;

    void validate() const {
        for (const auto& row : sh)
            for (double c : row)
                if (!std::isfinite(c)) throw InvalidArgumentError("Illumination: non-finite sh");
        if (!(flash_intensity >= 0.0))
            throw OutOfRangeError("flash_intensity", flash_intensity);
    }
};

/// Pinhole camera. Rays leave `position` toward the pixel grid spanned by
/// the look-at frame; resolution is (width, height).
struct Camera {
    Vec3 position{0.0, 0.0, 0.7};
    Vec3 look_at{0.0, 0.0, 0.0};
    Vec3 up{0.0, 1.0, 0.0};
    double vertical_fov = 40.0;  // degrees
    int width = 256;
    int height = 256;

    void validate() const {
        if (length(position - look_at) <= 0.0)
            throw InvalidArgumentError("Camera: position equals look_at");
        if (!(vertical_fov > 0.0 && vertical_fov < 180.0))
            throw OutOfRangeError("vertical_fov", vertical_fov);
        if (width < 1 || height < 1) throw InvalidArgumentError("Camera: bad resolution");
    }

    Vec3 forward() const { return normalize(look_at - position); }

    /// Orthonormal camera basis: x right, y up, z toward the camera.
    void basis(Vec3& right, Vec3& up_out, Vec3& back) const {
        Vec3 f = forward();
        right = normalize(cross(f, up));
        up_out = cross(right, f);
        back = -f;
    }
};

}  // namespace transluce
