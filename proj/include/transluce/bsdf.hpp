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

#include "transluce/rng.hpp"
#include "transluce/types.hpp"

namespace transluce {

// Rough dielectric microfacet BSDF. Conventions used across the repo:
//  - GGX normal distribution with alpha_g = roughness^2 (perceptual remap).
//  - `n` is the outward geometric normal; a direction is "outside" when its
//    dot with n is positive.
//  - `eta` is the interior/exterior index ratio (default 1.5046).
//  - eval_bsdf(wi, wo, ...) follows radiance transport: light arrives from
//    wi and leaves toward wo. Transmission carries Walter's eta_o^2 radiance
//    scaling, so integrating f_t over exitant directions at fixed wi
//    conserves energy while gathering over wi reproduces the (eta_o/eta_i)^2
//    radiance compression.

enum class BsdfEvent { Reflect, Transmit };

struct BsdfSample {
    Vec3 direction;          // sampled incident direction wi
    double pdf = 0.0;        // solid-angle density of `direction`
    double weight = 0.0;     // f * |wi.n| / pdf (achromatic)
    BsdfEvent event = BsdfEvent::Reflect;
    bool valid = false;
    bool delta = false;      // index-matched straight-through marker
};

struct PhaseSample {
    Vec3 direction;          // new propagation direction
    double pdf = 0.0;
};

struct BsdfEval {
    double f_r = 0.0;
    double f_t = 0.0;
    bool degenerate = false;

    double total() const { return f_r + f_t; }
};

/// Exact unpolarized dielectric Fresnel reflectance. cos_i is signed against
/// the outward normal; eta is the interior/exterior ratio. Returns 1 under
/// total internal reflection. When cos_t_out is given it receives the
/// magnitude of the transmitted cosine (0 under TIR).
double fresnel_dielectric(double cos_i, double eta, double* cos_t_out = nullptr);

/// GGX / Trowbridge-Reitz normal distribution, alpha_g = rough^2.
/// Zero for cos_h <= 0.
double ggx_ndf(double cos_h, double rough);

/// Smith G1 for GGX with the sidedness test chi+(dot(w,h)/dot(w,n)).
double smith_g1(const Vec3& w, const Vec3& h, const Vec3& n, double rough);

/// Separable Smith masking-shadowing G1(wi) * G1(wo).
double smith_g(const Vec3& wi, const Vec3& wo, const Vec3& h, const Vec3& n, double rough);

/// Microfacet reflection + transmission evaluation (see conventions above).
/// Cosines below 1e-7 flag the result degenerate with zero contribution.
BsdfEval eval_bsdf(const Vec3& wi, const Vec3& wo, const Vec3& n, double rough, double eta);

/// Solid-angle density with which sample_bsdf generates `wi` given `wo`.
double pdf_bsdf(const Vec3& wi, const Vec3& wo, const Vec3& n, double rough, double eta);

/// Samples an incident direction for known wo: GGX NDF sampling, then a
/// Fresnel-weighted choice between reflection and refraction. Degenerate
/// half-vector draws retry up to 8 times; finite-probability rejections
/// (backside microfacets, directions under the macro surface) return an
/// invalid sample so the realized density stays equal to pdf_bsdf.
/// eta == 1 yields a delta straight-through Transmit.
BsdfSample sample_bsdf(const Vec3& wo, const Vec3& n, double rough, double eta, Rng& rng);

/// Refracts `w` (pointing away from the surface) about microfacet normal
/// `m`; eta is interior/exterior. Returns false under TIR.
bool refract(const Vec3& w, const Vec3& m, double eta, Vec3& out);

/// Henyey-Greenstein phase density per steradian; cos_theta is measured
/// between the incoming and outgoing propagation directions, so g > 0
/// scatters forward. Integrates to 1 over the sphere.
double hg_phase(double cos_theta, double g);

/// Exact CDF inversion of the HG phase around the propagation direction
/// w_travel; uniform azimuth.
PhaseSample sample_hg(double g, const Vec3& w_travel, Rng& rng);

}  // namespace transluce
