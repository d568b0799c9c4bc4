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

#include <string>
#include <vector>

#include "transluce/types.hpp"

namespace transluce {

/// Physical ranges for the normalized [-1,1] parameter codec. Defaults are
/// the dataset ranges; shmax bounds SH coefficients symmetrically per
/// channel and is configurable because environment maps are unbounded.
struct ParamRanges {
    double sigma_t_lo = 0.0, sigma_t_hi = 32.0;
    double alpha_lo = 0.3, alpha_hi = 0.95;
    double g_lo = 0.0, g_hi = 0.9;
    double flash_lo = 35.0, flash_hi = 75.0;
    double rough_lo = 0.0, rough_hi = 1.0;
    double shmax = 3.0;
    /// Values may exceed a range by at most epsilon * (hi - lo).
    double epsilon = 1e-6;
};

enum class ParamGroup { Roughness = 0, Sh, FlashIntensity, SigmaT, Alpha, G };

constexpr int kParamGroupCount = 6;

const char* param_group_name(ParamGroup g);

/// Slice table mapping groups to contiguous index ranges of the flat vector.
/// Fixed order: [roughness raster, sh row-major (R bands 0..8, G, B), i,
/// sigma_t, alpha, g]. Slices are disjoint and cover the vector.
struct ParamLayout {
    int rough_width = 0;
    int rough_height = 0;

    size_t rough_offset() const { return 0; }
    size_t rough_size() const { return size_t(rough_width) * rough_height; }
    size_t sh_offset() const { return rough_size(); }
    size_t sh_size() const { return 27; }
    size_t flash_offset() const { return sh_offset() + sh_size(); }
    size_t sigma_t_offset() const { return flash_offset() + 1; }
    size_t alpha_offset() const { return sigma_t_offset() + 3; }
    size_t g_offset() const { return alpha_offset() + 3; }
    size_t total_size() const { return g_offset() + 1; }

    size_t group_offset(ParamGroup g) const;
    size_t group_size(ParamGroup g) const;

    bool operator==(const ParamLayout& o) const = default;
};

/// Flat optimizable parameters in normalized [-1,1] space.
struct ParamVector {
    ParamLayout layout;
    std::vector<double> values;

    double& operator[](size_t i) { return values[i]; }
    double operator[](size_t i) const { return values[i]; }
    size_t size() const { return values.size(); }
};

/// d(loss)/d(parameter) in normalized space; mirrors a ParamVector layout.
struct GradVector {
    ParamLayout layout;
    std::vector<double> values;

    double& operator[](size_t i) { return values[i]; }
    double operator[](size_t i) const { return values[i]; }
    size_t size() const { return values.size(); }
};

/// The physical-space bundle the codec maps: one roughness raster plus the
/// scalar scene parameters.
struct SceneParams {
    Image rough;        // 1ch raster
    Illumination illum;
    SssParams sss;
};

/// Affine map lo->-1, hi->+1 per entry. Throws OutOfRangeError when a value
/// exceeds its range by more than ranges.epsilon * (hi - lo).
ParamVector normalize_params(const SceneParams& physical, const ParamRanges& ranges);

/// Inverse of normalize_params.
SceneParams denormalize_params(const ParamVector& v, const ParamRanges& ranges);

/// Scalar helpers used by both directions and by gradient chain rules.
double normalize_scalar(double x, double lo, double hi);
double denormalize_scalar(double v, double lo, double hi);

/// Range endpoints of one vector entry under the fixed layout.
void entry_range(const ParamLayout& layout, const ParamRanges& ranges, size_t index, double& lo,
                 double& hi);

}  // namespace transluce
