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

#include "transluce/bsdf.hpp"

namespace transluce {

namespace {
constexpr double kCosEps = 1e-7;
}

double fresnel_dielectric(double cos_i, double eta, double* cos_t_out) {
    if (cos_t_out) *cos_t_out = 0.0;
    if (eta == 1.0) {
        if (cos_t_out) *cos_t_out = std::abs(cos_i);
        return 0.0;
    }
    double rel = eta;          // transmitted-over-incident index
    double ci = cos_i;
    if (ci < 0.0) {            // arriving from inside
        rel = 1.0 / eta;
        ci = -ci;
    }
    ci = std::min(ci, 1.0);
    double sin2_t = (1.0 - ci * ci) / (rel * rel);
    if (sin2_t >= 1.0) return 1.0;  // total internal reflection
    double ct = std::sqrt(1.0 - sin2_t);
    if (cos_t_out) *cos_t_out = ct;
    double r_s = (ci - rel * ct) / (ci + rel * ct);
    double r_p = (rel * ci - ct) / (rel * ci + ct);
    return 0.5 * (r_s * r_s + r_p * r_p);
}

double ggx_ndf(double cos_h, double rough) {
    if (cos_h <= 0.0) return 0.0;
    double a = rough * rough;
    double a2 = a * a;
    double d = cos_h * cos_h * (a2 - 1.0) + 1.0;
    return a2 / (kPi * d * d);
}

double smith_g1(const Vec3& w, const Vec3& h, const Vec3& n, double rough) {
    double wn = dot(w, n);
    double wh = dot(w, h);
    if (wh * wn <= 0.0) return 0.0;  // backside of the microfacet
    double cos2 = wn * wn;
    if (cos2 >= 1.0) return 1.0;
    double tan2 = (1.0 - cos2) / cos2;
    double a2 = sqr(rough * rough);
    return 2.0 / (1.0 + std::sqrt(1.0 + a2 * tan2));
}

double smith_g(const Vec3& wi, const Vec3& wo, const Vec3& h, const Vec3& n, double rough) {
    return smith_g1(wi, h, n, rough) * smith_g1(wo, h, n, rough);
}

bool refract(const Vec3& w, const Vec3& m, double eta, Vec3& out) {
    double cos_i = dot(w, m);
    // Relative index of the incident side over the transmitted side.
    double rel = cos_i > 0.0 ? 1.0 / eta : eta;
    double cos2_t = 1.0 - rel * rel * (1.0 - cos_i * cos_i);
    if (cos2_t <= 0.0) return false;
    double cos_t = std::sqrt(cos2_t);
    out = -rel * w + (rel * cos_i - std::copysign(cos_t, cos_i)) * m;
    return true;
}

BsdfEval eval_bsdf(const Vec3& wi, const Vec3& wo, const Vec3& n, double rough, double eta) {
    BsdfEval out;
    double ci = dot(wi, n);
    double co = dot(wo, n);
    if (std::abs(ci) < kCosEps || std::abs(co) < kCosEps) {
        out.degenerate = true;
        return out;
    }
    bool reflection = ci * co > 0.0;
    if (reflection) {
        Vec3 h = normalize(wi + wo);
        if (dot(h, n) < 0.0) h = -h;
        double d = ggx_ndf(dot(h, n), rough);
        if (d == 0.0) return out;
        double f = fresnel_dielectric(dot(wi, h), eta);
        double g = smith_g(wi, wo, h, n, rough);
        out.f_r = f * d * g / (4.0 * std::abs(ci) * std::abs(co));
        return out;
    }
    if (eta == 1.0) return out;  // index-matched transmission is a delta
    double eta_i = ci > 0.0 ? 1.0 : eta;
    double eta_o = co > 0.0 ? 1.0 : eta;
    Vec3 ht = eta_i * wi + eta_o * wo;
    double len2 = length_squared(ht);
    if (len2 < 1e-14) {
        out.degenerate = true;
        return out;
    }
    Vec3 h = ht / -std::sqrt(len2);
    if (dot(h, n) < 0.0) h = -h;
    double ih = dot(wi, h);
    double oh = dot(wo, h);
    double d = ggx_ndf(dot(h, n), rough);
    if (d == 0.0) return out;
    double f = fresnel_dielectric(ih, eta);
    double g = smith_g(wi, wo, h, n, rough);
    double denom = sqr(eta_i * ih + eta_o * oh);
    if (denom < 1e-14) {
        out.degenerate = true;
        return out;
    }
    out.f_t = std::abs(ih) * std::abs(oh) / (std::abs(ci) * std::abs(co)) * eta_o * eta_o *
              (1.0 - f) * g * d / denom;
    return out;
}

namespace {

// GGX NDF sampling in the local frame: pdf_m = D(m) cos(theta_m).
Vec3 sample_ggx(double rough, Rng& rng, double& pdf_m) {
    double a = rough * rough;
    double u1 = rng.next_double();
    double u2 = rng.next_double();
    double cos2 = (1.0 - u1) / (1.0 - u1 * (1.0 - a * a));
    double cos_t = std::sqrt(cos2);
    Vec3 m = spherical_direction(cos_t, kTwoPi * u2);
    pdf_m = ggx_ndf(cos_t, rough) * cos_t;
    return m;
}

double ggx_pdf_m(const Vec3& m, const Vec3& n, double rough) {
    double cos_t = dot(m, n);
    return cos_t > 0.0 ? ggx_ndf(cos_t, rough) * cos_t : 0.0;
}

}  // namespace

double pdf_bsdf(const Vec3& wi, const Vec3& wo, const Vec3& n, double rough, double eta) {
    double ci = dot(wi, n);
    double co = dot(wo, n);
    if (std::abs(ci) < kCosEps || std::abs(co) < kCosEps) return 0.0;
    bool reflection = ci * co > 0.0;
    if (reflection) {
        Vec3 h = normalize(wi + wo);
        if (dot(h, n) < 0.0) h = -h;
        double oh = dot(wo, h);
        if (oh * co <= 0.0) return 0.0;
        double f = fresnel_dielectric(oh, eta);
        return ggx_pdf_m(h, n, rough) * f / (4.0 * std::abs(oh));
    }
    if (eta == 1.0) return 0.0;  // delta branch
    double eta_i = ci > 0.0 ? 1.0 : eta;
    double eta_o = co > 0.0 ? 1.0 : eta;
    Vec3 ht = eta_i * wi + eta_o * wo;
    double len2 = length_squared(ht);
    if (len2 < 1e-14) return 0.0;
    Vec3 h = ht / -std::sqrt(len2);
    if (dot(h, n) < 0.0) h = -h;
    double ih = dot(wi, h);
    double oh = dot(wo, h);
    // Each direction must lie on its own side of the microfacet, matching
    // the chi+ sidedness of the Smith terms; the reconstructed half vector
    // is spurious otherwise and the sampler cannot reach the pair.
    if (ih * ci <= 0.0 || oh * co <= 0.0) return 0.0;
    double f = fresnel_dielectric(oh, eta);
    double denom = sqr(eta_i * ih + eta_o * oh);
    if (denom < 1e-14) return 0.0;
    // dOmega_m / dOmega_wi Jacobian of the refraction mapping.
    double jac = eta_i * eta_i * std::abs(ih) / denom;
    return ggx_pdf_m(h, n, rough) * (1.0 - f) * jac;
}

BsdfSample sample_bsdf(const Vec3& wo, const Vec3& n, double rough, double eta, Rng& rng) {
    BsdfSample out;
    double co = dot(wo, n);
    if (std::abs(co) < kCosEps) return out;

    if (eta == 1.0) {
        // The interface vanishes: straight-through delta transmission.
        out.direction = -wo;
        out.pdf = 1.0;
        out.weight = 1.0;
        out.event = BsdfEvent::Transmit;
        out.valid = true;
        out.delta = true;
        return out;
    }

    // Rejections with finite probability (backside microfacets, directions
    //折ing under the macro surface) must return a null sample: resampling
    // them would renormalize the realized density away from pdf_bsdf. Only
    // the measure-zero degenerate half-vector draw retries.
    Frame frame(co > 0.0 ? n : -n);
    Vec3 m;
    double pdf_m_local = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Vec3 m_local = sample_ggx(rough, rng, pdf_m_local);
        if (!(pdf_m_local > 0.0) || !std::isfinite(m_local.z)) continue;
        m = frame.to_world(m_local);
        break;
    }
    if (!(pdf_m_local > 0.0)) return out;
    if (dot(m, n) < 0.0) m = -m;  // keep m in the outward hemisphere
    double om = dot(wo, m);
    if (om * co <= 0.0) return out;

    double f = fresnel_dielectric(om, eta);
    bool do_reflect = rng.next_double() < f;
    Vec3 wi;
    if (do_reflect) {
        wi = reflect(wo, m);
        if (dot(wi, n) * co <= 0.0) return out;  // fell under the macro surface
        out.event = BsdfEvent::Reflect;
    } else {
        if (!refract(wo, m, eta, wi)) return out;  // numerical TIR edge
        if (dot(wi, n) * co >= 0.0) return out;
        out.event = BsdfEvent::Transmit;
    }
    double pdf = pdf_bsdf(wi, wo, n, rough, eta);
    if (!(pdf > 0.0)) return out;
    BsdfEval eval = eval_bsdf(wi, wo, n, rough, eta);
    double f_val = out.event == BsdfEvent::Reflect ? eval.f_r : eval.f_t;
    if (!(f_val > 0.0)) return out;
    out.direction = wi;
    out.pdf = pdf;
    out.weight = f_val * std::abs(dot(wi, n)) / pdf;
    out.valid = true;
    return out;
}

double hg_phase(double cos_theta, double g) {
    double denom = 1.0 + g * g - 2.0 * g * cos_theta;
    denom = std::max(denom, 1e-12);
    return kInvFourPi * (1.0 - g * g) / (denom * std::sqrt(denom));
}

PhaseSample sample_hg(double g, const Vec3& w_travel, Rng& rng) {
    double u1 = rng.next_double();
    double u2 = rng.next_double();
    double cos_theta;
    if (std::abs(g) < 1e-6) {
        cos_theta = 1.0 - 2.0 * u1;
    } else {
        double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u1);
        cos_theta = (1.0 + g * g - s * s) / (2.0 * g);
    }
    cos_theta = clamp(cos_theta, -1.0, 1.0);
    Frame frame(w_travel);
    PhaseSample out;
    out.direction = frame.to_world(spherical_direction(cos_theta, kTwoPi * u2));
    out.pdf = hg_phase(cos_theta, g);
    return out;
}

}  // namespace transluce
