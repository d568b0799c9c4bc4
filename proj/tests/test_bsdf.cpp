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

#include "doctest.h"
#include "testutil.hpp"
#include "transluce/bsdf.hpp"
#include "transluce/quadrature.hpp"

using namespace transluce;

namespace {

const Vec3 kUp{0.0, 0.0, 1.0};

Vec3 uniform_dir(Rng& rng) {
    double z = 1.0 - 2.0 * rng.next_double();
    return spherical_direction(z, kTwoPi * rng.next_double());
}

Vec3 uniform_hemisphere(Rng& rng) {
    return spherical_direction(rng.next_double(), kTwoPi * rng.next_double());
}

}  // namespace

TEST_CASE("fresnel_dielectric closed-form anchors") {
    // Normal incidence: ((eta-1)/(eta+1))^2, evaluated independently.
    const double eta = 1.5046;
    const double expected = sqr((eta - 1.0) / (eta + 1.0));
    CHECK(fresnel_dielectric(1.0, eta) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.0406).epsilon(1e-2));

    CHECK(fresnel_dielectric(1e-9, eta) == doctest::Approx(1.0).epsilon(1e-3));
    for (double c : {0.1, 0.4, 0.9, 1.0}) CHECK(fresnel_dielectric(c, 1.0) == 0.0);

    // From inside beyond the critical angle: total internal reflection.
    double crit = std::sqrt(1.0 - 1.0 / (eta * eta));
    CHECK(fresnel_dielectric(-0.5 * crit, eta) == 1.0);
    // Symmetric through the interface at normal incidence.
    CHECK(fresnel_dielectric(-1.0, eta) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ggx ndf normalization and peak") {
    // Projected-area normalization: the hemisphere integral of D(h) cos dh
    // is 1. Monte Carlo quadrature for the wide lobes; the azimuthal
    // symmetry reduces the narrow lobe to a 1D Gauss-Legendre integral.
    for (double rough : {0.5, 0.75, 1.0}) {
        Rng rng(77, uint64_t(rough * 100), 0);
        const int n = 1000000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            Vec3 h = uniform_hemisphere(rng);
            acc += ggx_ndf(h.z, rough) * h.z;
        }
        acc *= kTwoPi / n;
        CHECK(acc == doctest::Approx(1.0).epsilon(0.01));
    }
    for (double rough : {0.2, 0.35}) {
        std::vector<double> nodes, weights;
        double acc = 0.0;
        const int panels = 400, per_panel = 16;
        for (int pnl = 0; pnl < panels; ++pnl) {
            gauss_legendre_ab(per_panel, double(pnl) / panels, double(pnl + 1) / panels, nodes,
                              weights);
            for (int i = 0; i < per_panel; ++i)
                acc += weights[size_t(i)] * ggx_ndf(nodes[size_t(i)], rough) * nodes[size_t(i)];
        }
        acc *= kTwoPi;
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
    }

    double rough = 0.1;  // alpha_g = 0.01
    double ag = rough * rough;
    CHECK(ggx_ndf(1.0, rough) == doctest::Approx(1.0 / (kPi * ag * ag)).epsilon(1e-12));
    CHECK(ggx_ndf(0.0, rough) == 0.0);
    CHECK(ggx_ndf(-0.3, rough) == 0.0);
}

TEST_CASE("smith g limits and projected-area consistency") {
    Vec3 wo = normalize(Vec3{0.3, 0.1, 0.9});
    Vec3 wi = normalize(Vec3{-0.2, 0.4, 0.8});
    CHECK(smith_g(wi, wo, kUp, kUp, 0.01) == doctest::Approx(1.0).epsilon(1e-3));

    Vec3 grazing = normalize(Vec3{1.0, 0.0, 1e-4});
    CHECK(smith_g1(grazing, kUp, kUp, 0.8) < 1e-3);

    // Weak white furnace: the h-integral of G1(wo,h) D(h) max(wo.h,0)
    // equals wo.n -- the defining property of Smith masking.
    for (double rough : {0.3, 0.7, 1.0}) {
        for (double cos_o : {0.9, 0.5, 0.2}) {
            Vec3 woq = spherical_direction(cos_o, 0.3);
            Rng rng(31, uint64_t(rough * 10), uint64_t(cos_o * 10));
            const int n = 500000;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                Vec3 h = uniform_hemisphere(rng);
                acc += smith_g1(woq, h, kUp, rough) * ggx_ndf(h.z, rough) *
                       std::max(dot(woq, h), 0.0);
            }
            acc *= kTwoPi / n;
            CHECK(acc / cos_o == doctest::Approx(1.0).epsilon(0.02));
        }
    }
}

TEST_CASE("eval_bsdf reflection reciprocity") {
    Rng rng(5, 0, 0);
    int checked = 0;
    for (int i = 0; i < 20000 && checked < 200; ++i) {
        Vec3 wi = uniform_dir(rng);
        Vec3 wo = uniform_dir(rng);
        if (dot(wi, kUp) * dot(wo, kUp) <= 0.0) continue;
        double rough = 0.1 + 0.9 * rng.next_double();
        BsdfEval ab = eval_bsdf(wi, wo, kUp, rough, kDefaultIor);
        BsdfEval ba = eval_bsdf(wo, wi, kUp, rough, kDefaultIor);
        if (ab.f_r == 0.0 && ba.f_r == 0.0) continue;
        CHECK(ab.f_r == doctest::Approx(ba.f_r).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked >= 200);
}

TEST_CASE("eval_bsdf transmission reciprocity with the eta^2 convention") {
    // Walter's relation: f_t(i,o)/eta_o^2 = f_t(o,i)/eta_i^2.
    Rng rng(6, 0, 0);
    const double eta = kDefaultIor;
    int checked = 0;
    for (int i = 0; i < 40000 && checked < 200; ++i) {
        Vec3 wi = uniform_dir(rng);
        Vec3 wo = uniform_dir(rng);
        if (dot(wi, kUp) * dot(wo, kUp) >= 0.0) continue;
        double rough = 0.2 + 0.8 * rng.next_double();
        BsdfEval ab = eval_bsdf(wi, wo, kUp, rough, eta);
        BsdfEval ba = eval_bsdf(wo, wi, kUp, rough, eta);
        if (ab.f_t <= 0.0 || ba.f_t <= 0.0) continue;
        double eta_i = dot(wi, kUp) > 0.0 ? 1.0 : eta;
        double eta_o = dot(wo, kUp) > 0.0 ? 1.0 : eta;
        CHECK(ab.f_t / (eta_o * eta_o) ==
              doctest::Approx(ba.f_t / (eta_i * eta_i)).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked >= 200);
}

TEST_CASE("index-matched boundary has zero reflection") {
    Rng rng(7, 0, 0);
    for (int i = 0; i < 100; ++i) {
        Vec3 wi = uniform_hemisphere(rng);
        Vec3 wo = uniform_hemisphere(rng);
        BsdfEval e = eval_bsdf(wi, wo, kUp, 0.5, 1.0);
        CHECK(e.f_r == 0.0);
    }
    Rng srng(8, 0, 0);
    for (int i = 0; i < 100; ++i) {
        BsdfSample s = sample_bsdf(uniform_hemisphere(srng), kUp, 0.5, 1.0, srng);
        REQUIRE(s.valid);
        CHECK(s.event == BsdfEvent::Transmit);
        CHECK(s.delta);
    }
}

TEST_CASE("directional albedo stays below one") {
    // For fixed incident wi, the scattered energy integral over exitant
    // directions of (f_r + f_t) |wo.n| must not exceed 1.
    // Mixture importance sampling: half uniform sphere, half the analytic
    // sampling density (itself validated by the chi-square test), so sharp
    // lobes stay integrable.
    Rng rng(9, 0, 0);
    for (int trial = 0; trial < 100; ++trial) {
        double rough = 0.15 + 0.85 * rng.next_double();
        double ci = 0.05 + 0.95 * rng.next_double();
        Vec3 wi = spherical_direction(ci, kTwoPi * rng.next_double());
        Rng qrng(1000 + uint64_t(trial), 0, 0);
        const int n = 60000;
        double acc = 0.0;
        for (int s = 0; s < n; ++s) {
            Vec3 wo;
            if (qrng.next_double() < 0.5) {
                wo = uniform_dir(qrng);
            } else {
                BsdfSample bs = sample_bsdf(wi, kUp, rough, kDefaultIor, qrng);
                if (!bs.valid) continue;
                wo = bs.direction;
            }
            double pdf_mix =
                0.5 * kInvFourPi + 0.5 * pdf_bsdf(wo, wi, kUp, rough, kDefaultIor);
            BsdfEval e = eval_bsdf(wi, wo, kUp, rough, kDefaultIor);
            acc += e.total() * std::abs(dot(wo, kUp)) / pdf_mix;
        }
        acc /= n;
        CHECK(acc < 1.015);
    }
}

TEST_CASE("sample_bsdf pdf matches pdf_bsdf and weights are consistent") {
    Rng rng(10, 0, 0);
    int valid = 0;
    for (int i = 0; i < 2000; ++i) {
        double rough = 0.1 + 0.9 * rng.next_double();
        Vec3 wo = spherical_direction(0.05 + 0.95 * rng.next_double(),
                                      kTwoPi * rng.next_double());
        if (rng.next_double() < 0.4) wo = -wo;  // exercise the inside
        BsdfSample s = sample_bsdf(wo, kUp, rough, kDefaultIor, rng);
        if (!s.valid) continue;
        ++valid;
        double pdf = pdf_bsdf(s.direction, wo, kUp, rough, kDefaultIor);
        CHECK(pdf == doctest::Approx(s.pdf).epsilon(1e-6));
        BsdfEval e = eval_bsdf(s.direction, wo, kUp, rough, kDefaultIor);
        double f = s.event == BsdfEvent::Reflect ? e.f_r : e.f_t;
        CHECK(s.weight ==
              doctest::Approx(f * std::abs(dot(s.direction, kUp)) / s.pdf).epsilon(1e-9));
        CHECK(s.weight >= 0.0);
    }
    CHECK(valid > 1600);
}

TEST_CASE("sampled directions follow the analytic density (chi-square)") {
    // Histogram sampled directions over a cos x phi grid and compare with
    // the numerically integrated pdf per cell.
    const double rough = 0.7;
    const double eta = kDefaultIor;
    Vec3 wo = spherical_direction(0.8, 0.3);
    const int n_cos = 12, n_phi = 6, n_samples = 400000;

    std::vector<double> observed(size_t(n_cos * n_phi), 0.0);
    Rng rng(11, 0, 0);
    int kept = 0;
    for (int i = 0; i < n_samples; ++i) {
        BsdfSample s = sample_bsdf(wo, kUp, rough, eta, rng);
        if (!s.valid) continue;
        ++kept;
        double c = clamp(dot(s.direction, kUp), -0.999999, 0.999999);
        double phi = std::atan2(s.direction.y, s.direction.x);
        int ci = int((c + 1.0) / 2.0 * n_cos);
        int pi_ = int((phi + kPi) / kTwoPi * n_phi);
        observed[size_t(ci * n_phi + clamp(pi_, 0, n_phi - 1))] += 1.0;
    }

    // Expected counts: pdf integrated per cell on a subgrid.
    std::vector<double> expected(size_t(n_cos * n_phi), 0.0);
    const int sub = 32;
    for (int ci = 0; ci < n_cos; ++ci)
        for (int pi_ = 0; pi_ < n_phi; ++pi_) {
            double acc = 0.0;
            for (int a = 0; a < sub; ++a)
                for (int b = 0; b < sub; ++b) {
                    double c = -1.0 + 2.0 * (ci + (a + 0.5) / sub) / n_cos;
                    double phi = -kPi + kTwoPi * (pi_ + (b + 0.5) / sub) / n_phi;
                    acc += pdf_bsdf(spherical_direction(c, phi), wo, kUp, rough, eta);
                }
            double cell = (2.0 / n_cos) * (kTwoPi / n_phi) / (sub * sub);
            expected[size_t(ci * n_phi + pi_)] = acc * cell * n_samples;
        }
    double expected_total = 0.0;
    for (double e : expected) expected_total += e;
    observed.push_back(double(n_samples - kept));      // null samples
    expected.push_back(double(n_samples) - expected_total);
    CHECK(testutil::chi2_test(observed, expected) > 0.01);
}

TEST_CASE("near-specular reflection samples cluster at the mirror direction") {
    const double rough = 0.01;
    Vec3 wo = spherical_direction(std::cos(radians(45.0)), 0.0);
    Vec3 mirror = reflect(wo, kUp);
    Rng rng(13, 0, 0);
    int reflects = 0, close = 0;
    for (int i = 0; i < 20000; ++i) {
        BsdfSample s = sample_bsdf(wo, kUp, rough, kDefaultIor, rng);
        if (!s.valid || s.event != BsdfEvent::Reflect) continue;
        ++reflects;
        if (dot(s.direction, mirror) > std::cos(radians(5.0))) ++close;
    }
    REQUIRE(reflects > 300);  // Fresnel at 45 degrees is ~5 percent
    CHECK(double(close) / reflects >= 0.95);
}

TEST_CASE("hg phase anchors and quadrature normalization") {
    CHECK(hg_phase(0.3, 0.0) == doctest::Approx(1.0 / kFourPi).epsilon(1e-12));
    CHECK(hg_phase(-0.9, 0.0) == doctest::Approx(0.0795775).epsilon(1e-5));
    // Forward peak at g = 0.5: (1/4pi)(1-g^2)/(1-g)^3 = 6/(4pi).
    CHECK(hg_phase(1.0, 0.5) == doctest::Approx(6.0 / kFourPi).epsilon(1e-12));
    CHECK(hg_phase(1.0, 0.5) == doctest::Approx(0.477465).epsilon(1e-5));

    // 1e5-point composite Gauss-Legendre over cos(theta).
    std::vector<double> nodes, weights;
    const int panels = 1563, per_panel = 64;  // 100032 points
    for (double g : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            double a = -1.0 + 2.0 * p / panels;
            double b = -1.0 + 2.0 * (p + 1) / panels;
            gauss_legendre_ab(per_panel, a, b, nodes, weights);
            for (int i = 0; i < per_panel; ++i)
                acc += weights[size_t(i)] * hg_phase(nodes[size_t(i)], g);
        }
        acc *= kTwoPi;  // azimuth
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("sample_hg isotropic case is uniform and pdf matches the density") {
    Rng rng(17, 0, 0);
    const int n = 200000, bins = 12;
    std::vector<double> counts(bins, 0.0), expected(bins, double(n) / bins);
    Vec3 travel = normalize(Vec3{0.2, -0.4, 0.9});
    for (int i = 0; i < n; ++i) {
        PhaseSample s = sample_hg(0.0, travel, rng);
        // Equal-area bins in cos(theta) against the travel direction.
        double c = clamp(dot(s.direction, travel), -0.999999, 0.999999);
        counts[size_t((c + 1.0) / 2.0 * bins)] += 1.0;
    }
    CHECK(testutil::chi2_test(counts, expected) > 0.01);

    for (double g : {-0.7, 0.0, 0.4, 0.9}) {
        Rng r2(18, uint64_t((g + 1) * 100), 0);
        for (int i = 0; i < 200; ++i) {
            PhaseSample s = sample_hg(g, travel, r2);
            CHECK(std::abs(length(s.direction) - 1.0) < 1e-9);
            CHECK(s.pdf ==
                  doctest::Approx(hg_phase(dot(s.direction, travel), g)).epsilon(1e-9));
        }
    }
}

TEST_CASE("sample_hg mean cosine equals g within 3 sigma") {
    Vec3 travel{0.0, 0.0, 1.0};
    for (double g : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        Rng rng(19, uint64_t((g + 1) * 1000), 0);
        const int n = 1000000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double c = dot(sample_hg(g, travel, rng).direction, travel);
            sum += c;
            sum2 += c * c;
        }
        double mean = sum / n;
        double se = std::sqrt(std::max(sum2 / n - mean * mean, 1e-12) / n);
        CHECK(std::abs(mean - g) < 3.0 * se + 1e-4);
    }
}

TEST_CASE("strong forward scattering concentrates samples") {
    Vec3 travel{0.0, 0.0, 1.0};
    Rng rng(23, 0, 0);
    int forward = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (dot(sample_hg(0.9, travel, rng).direction, travel) > 0.5) ++forward;
    // CDF oracle for the HG law: P(cos > c) from the closed-form CDF.
    double g = 0.9;
    double cdf_at = (1.0 - g * g) / (2.0 * g) *
                    (1.0 / std::sqrt(1.0 + g * g - 2.0 * g * 0.5) - 1.0 / (1.0 + g));
    double p_above = 1.0 - cdf_at;
    CHECK(double(forward) / n >= 0.80);
    CHECK(double(forward) / n == doctest::Approx(p_above).epsilon(0.02));
}

TEST_CASE("sampler-based integration matches direct quadrature") {
    // A smooth integrand two ways: importance sampling with the BSDF
    // sampler and weights, vs direct MC quadrature of f*(f_r+f_t)*|cos|.
    const double rough = 0.6;
    const double eta = kDefaultIor;
    Vec3 wo = spherical_direction(0.75, 1.1);
    auto integrand = [](const Vec3& w) { return 1.5 + w.z + 0.5 * w.x * w.x; };

    Rng rng(29, 0, 0);
    const int n = 400000;
    double via_sampler = 0.0;
    for (int i = 0; i < n; ++i) {
        BsdfSample s = sample_bsdf(wo, kUp, rough, eta, rng);
        if (!s.valid) continue;
        via_sampler += s.weight * integrand(s.direction);
    }
    via_sampler /= n;

    Rng qrng(30, 0, 0);
    double direct = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec3 wi;
        if (qrng.next_double() < 0.5) {
            wi = uniform_dir(qrng);
        } else {
            BsdfSample bs = sample_bsdf(wo, kUp, rough, eta, qrng);
            if (!bs.valid) continue;
            wi = bs.direction;
        }
        double pdf_mix = 0.5 * kInvFourPi + 0.5 * pdf_bsdf(wi, wo, kUp, rough, eta);
        BsdfEval e = eval_bsdf(wi, wo, kUp, rough, eta);
        direct += e.total() * std::abs(dot(wi, kUp)) * integrand(wi) / pdf_mix;
    }
    direct /= n;
    CHECK(via_sampler == doctest::Approx(direct).epsilon(0.01));
}
