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

#include "transluce/params.hpp"

namespace transluce {

void GBuffer::validate() const {
    if (depth.channels != 1 || rough.channels != 1 || mask.channels != 1 || normal.channels != 3)
        throw InvalidArgumentError("GBuffer: wrong channel counts");
    if (!depth.same_shape(rough) || depth.width != normal.width ||
        depth.height != normal.height || !depth.same_shape(mask))
        throw ShapeMismatchError("GBuffer: rasters disagree on dimensions");
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            float m = mask.at(x, y);
            if (m != 0.0f && m != 1.0f) throw InvalidArgumentError("GBuffer: mask not binary");
            if (m == 0.0f) continue;
            if (!(depth.at(x, y) > 0.0f)) throw InvalidArgumentError("GBuffer: depth <= 0 on mask");
            double r = rough.at(x, y);
            if (!(r > 0.0 && r <= 1.0)) throw OutOfRangeError("roughness", r);
            Vec3 n{normal.at(x, y, 0), normal.at(x, y, 1), normal.at(x, y, 2)};
            if (std::abs(length(n) - 1.0) > 1e-4)
                throw NotUnitError("GBuffer: normal not unit length on mask");
        }
    }
}

SssParams lerp_sss(const SssParams& a, const SssParams& b, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidTError("lerp_sss: t outside [0,1]");
    SssParams out;
    out.sigma_t = a.sigma_t * (1.0 - t) + b.sigma_t * t;
    out.alpha = a.alpha * (1.0 - t) + b.alpha * t;
    out.g = a.g * (1.0 - t) + b.g * t;
    return out;
}

const char* param_group_name(ParamGroup g) {
    switch (g) {
        case ParamGroup::Roughness: return "roughness";
        case ParamGroup::Sh: return "sh";
        case ParamGroup::FlashIntensity: return "flash_intensity";
        case ParamGroup::SigmaT: return "sigma_t";
        case ParamGroup::Alpha: return "alpha";
        case ParamGroup::G: return "g";
    }
    return "?";
}

size_t ParamLayout::group_offset(ParamGroup g) const {
    switch (g) {
        case ParamGroup::Roughness: return rough_offset();
        case ParamGroup::Sh: return sh_offset();
        case ParamGroup::FlashIntensity: return flash_offset();
        case ParamGroup::SigmaT: return sigma_t_offset();
        case ParamGroup::Alpha: return alpha_offset();
        case ParamGroup::G: return g_offset();
    }
    return 0;
}

size_t ParamLayout::group_size(ParamGroup g) const {
    switch (g) {
        case ParamGroup::Roughness: return rough_size();
        case ParamGroup::Sh: return sh_size();
        case ParamGroup::FlashIntensity: return 1;
        case ParamGroup::SigmaT: return 3;
        case ParamGroup::Alpha: return 3;
        case ParamGroup::G: return 1;
    }
    return 0;
}

double normalize_scalar(double x, double lo, double hi) {
    return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

double denormalize_scalar(double v, double lo, double hi) {
    return lo + (v + 1.0) * 0.5 * (hi - lo);
}

void entry_range(const ParamLayout& layout, const ParamRanges& ranges, size_t index, double& lo,
                 double& hi) {
    if (index < layout.sh_offset()) {
        lo = ranges.rough_lo;
        hi = ranges.rough_hi;
    } else if (index < layout.flash_offset()) {
        lo = -ranges.shmax;
        hi = ranges.shmax;
    } else if (index < layout.sigma_t_offset()) {
        lo = ranges.flash_lo;
        hi = ranges.flash_hi;
    } else if (index < layout.alpha_offset()) {
        lo = ranges.sigma_t_lo;
        hi = ranges.sigma_t_hi;
    } else if (index < layout.g_offset()) {
        lo = ranges.alpha_lo;
        hi = ranges.alpha_hi;
    } else {
        lo = ranges.g_lo;
        hi = ranges.g_hi;
    }
}

namespace {

double checked_normalize(const char* name, double x, double lo, double hi, double epsilon) {
    double slack = epsilon * (hi - lo);
    if (x < lo - slack || x > hi + slack) throw OutOfRangeError(name, x);
    return clamp(normalize_scalar(x, lo, hi), -1.0, 1.0);
}

}  // namespace

ParamVector normalize_params(const SceneParams& physical, const ParamRanges& ranges) {
    if (physical.rough.channels != 1)
        throw InvalidArgumentError("normalize_params: roughness raster must be 1ch");
    ParamVector out;
    out.layout.rough_width = physical.rough.width;
    out.layout.rough_height = physical.rough.height;
    out.values.resize(out.layout.total_size());

    size_t k = 0;
    for (float r : physical.rough.data)
        out.values[k++] = checked_normalize("roughness", r, ranges.rough_lo, ranges.rough_hi,
                                            ranges.epsilon);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 9; ++j)
            out.values[k++] = checked_normalize("sh", physical.illum.sh[c][j], -ranges.shmax,
                                                ranges.shmax, ranges.epsilon);
    out.values[k++] = checked_normalize("flash_intensity", physical.illum.flash_intensity,
                                        ranges.flash_lo, ranges.flash_hi, ranges.epsilon);
    for (int c = 0; c < 3; ++c)
        out.values[k++] = checked_normalize("sigma_t", physical.sss.sigma_t[c], ranges.sigma_t_lo,
                                            ranges.sigma_t_hi, ranges.epsilon);
    for (int c = 0; c < 3; ++c)
        out.values[k++] = checked_normalize("alpha", physical.sss.alpha[c], ranges.alpha_lo,
                                            ranges.alpha_hi, ranges.epsilon);
    out.values[k++] = checked_normalize("g", physical.sss.g, ranges.g_lo, ranges.g_hi,
                                        ranges.epsilon);
    return out;
}

SceneParams denormalize_params(const ParamVector& v, const ParamRanges& ranges) {
    if (v.values.size() != v.layout.total_size())
        throw ShapeMismatchError("denormalize_params: vector does not match its layout");
    SceneParams out;
    out.rough = Image(v.layout.rough_width, v.layout.rough_height, 1);

    size_t k = 0;
    for (float& r : out.rough.data)
        r = float(denormalize_scalar(v.values[k++], ranges.rough_lo, ranges.rough_hi));
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 9; ++j)
            out.illum.sh[c][j] = denormalize_scalar(v.values[k++], -ranges.shmax, ranges.shmax);
    out.illum.flash_intensity = denormalize_scalar(v.values[k++], ranges.flash_lo, ranges.flash_hi);
    for (int c = 0; c < 3; ++c)
        out.sss.sigma_t[c] = denormalize_scalar(v.values[k++], ranges.sigma_t_lo,
                                                ranges.sigma_t_hi);
    for (int c = 0; c < 3; ++c)
        out.sss.alpha[c] = denormalize_scalar(v.values[k++], ranges.alpha_lo, ranges.alpha_hi);
    out.sss.g = denormalize_scalar(v.values[k++], ranges.g_lo, ranges.g_hi);
    return out;
}

}  // namespace transluce
