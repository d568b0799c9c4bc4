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

#include "transluce/volume.hpp"

#include "transluce/bsdf.hpp"
#include "transluce/parallel.hpp"
#include "transluce/quadrature.hpp"

namespace transluce {

namespace {
constexpr double kSmoothRough = 0.01;  // below this the interface acts as a perfect dielectric
constexpr double kRayEps = 2e-7;
}  // namespace

Spectrum EnvLight::eval(const Vec3& dir) const {
    switch (kind) {
        case Kind::Constant:
            return constant;
        case Kind::Sh: {
            Spectrum L = eval_sh_radiance(sh, dir);
            return {std::max(L.r, 0.0), std::max(L.g, 0.0), std::max(L.b, 0.0)};
        }
        case Kind::Map:
            return map.eval(dir);
        case Kind::Cone:
            return dot(dir, axis) > cone_cos ? constant : Spectrum(0.0);
        case Kind::Lobe: {
            double c = 0.5 * (1.0 + dot(dir, axis));
            return constant * std::pow(c, lobe_power);
        }
    }
    return Spectrum(0.0);
}

EnvLight EnvLight::make_constant(const Spectrum& L) {
    EnvLight e;
    e.kind = Kind::Constant;
    e.constant = L;
    return e;
}

EnvLight EnvLight::make_sh(const Sh3x9& sh) {
    EnvLight e;
    e.kind = Kind::Sh;
    e.sh = sh;
    return e;
}

EnvLight EnvLight::make_map(EnvMap map) {
    EnvLight e;
    e.kind = Kind::Map;
    e.map = std::move(map);
    return e;
}

EnvLight EnvLight::make_cone(const Vec3& axis, double cone_cos, const Spectrum& L) {
    EnvLight e;
    e.kind = Kind::Cone;
    e.axis = normalize(axis);
    e.cone_cos = cone_cos;
    e.constant = L;
    return e;
}

EnvLight EnvLight::make_lobe(const Vec3& axis, double power, const Spectrum& L) {
    EnvLight e;
    e.kind = Kind::Lobe;
    e.axis = normalize(axis);
    e.lobe_power = power;
    e.constant = L;
    return e;
}

FlashLight FlashLight::for_camera(const Camera& camera, double radiance) {
    FlashLight f;
    f.center = camera.position - camera.forward() * 0.10;
    f.radius = 0.10;
    f.radiance = radiance;
    return f;
}

double RoughnessSource::at(const Vec3& local_dir) const {
    if (!is_texture()) return constant;
    double u = (std::atan2(local_dir.z, local_dir.x) + kPi) / kTwoPi;
    double v = std::acos(clamp(local_dir.y, -1.0, 1.0)) / kPi;
    double fx = u * texture.width * texture_scale;
    double fy = v * texture.height * texture_scale;
    int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
    double tx = fx - x0, ty = fy - y0;
    auto texel = [&](int x, int y) {
        x = ((x % texture.width) + texture.width) % texture.width;
        y = ((y % texture.height) + texture.height) % texture.height;
        return double(texture.at(x, y));
    };
    double r = texel(x0, y0) * (1 - tx) * (1 - ty) + texel(x0 + 1, y0) * tx * (1 - ty) +
               texel(x0, y0 + 1) * (1 - tx) * ty + texel(x0 + 1, y0 + 1) * tx * ty;
    return clamp(r, 0.03, 1.0);
}

Spectrum transmittance(const Spectrum& sigma_t, double distance) {
    if (!(distance >= 0.0)) throw InvalidArgumentError("transmittance: negative distance");
    return {std::exp(-sigma_t.r * distance), std::exp(-sigma_t.g * distance),
            std::exp(-sigma_t.b * distance)};
}

FreeFlight sample_free_flight(double sigma_t_channel, Rng& rng) {
    if (sigma_t_channel <= 0.0)
        throw ZeroExtinctionError("sample_free_flight: sigma_t channel is zero");
    double u = rng.next_double();
    FreeFlight out;
    out.distance = -std::log1p(-u) / sigma_t_channel;
    out.pdf = sigma_t_channel * std::exp(-sigma_t_channel * out.distance);
    return out;
}

namespace {

struct PathScene {
    const VolumeScene* scene;
    Vec3 obj_centroid;
    double eta;
    TraceMode mode;
    int max_bounces;
    int rr_start;
};

bool intersect_flash(const FlashLight& flash, const Ray& ray, double& t) {
    SurfaceHit hit;
    if (!intersect_sphere(Sphere{flash.center, flash.radius}, ray, hit)) return false;
    t = hit.t;
    return true;
}

// Flash cone solid-angle sampling density from point p (0 if p is inside).
double flash_cone_pdf(const FlashLight& flash, const Vec3& p) {
    double d2 = length_squared(flash.center - p);
    double r2 = flash.radius * flash.radius;
    if (d2 <= r2) return 0.0;
    double cos_max = std::sqrt(1.0 - r2 / d2);
    return 1.0 / (kTwoPi * (1.0 - cos_max));
}

double power_mis(double pdf_a, double pdf_b) {
    double a2 = pdf_a * pdf_a;
    return a2 / (a2 + pdf_b * pdf_b);
}

Spectrum path_radiance(const PathScene& ps, Ray ray, Rng& rng) {
    const VolumeScene& sc = *ps.scene;
    const Spectrum sigma_t = sc.sss.sigma_t;
    const Spectrum sigma_s = sc.sss.sigma_s();
    const bool has_medium = ps.mode != TraceMode::SurfaceOnly && sigma_t.max_channel() > 0.0;
    const bool has_flash = sc.flash && ps.mode != TraceMode::SingleScatter;

    Spectrum L(0.0);
    Spectrum beta(1.0);
    bool inside = false;
    bool scattered = false;  // SingleScatter bookkeeping
    bool prev_countable = false;
    double prev_pdf = 0.0;
    Vec3 prev_pos;

    for (int depth = 0; depth < ps.max_bounces; ++depth) {
        SurfaceHit hit;
        bool hit_obj = intersect_geometry(sc.geometry, ray, hit);
        double flash_t = std::numeric_limits<double>::infinity();
        bool hit_flash = false;
        if (has_flash && !inside) {
            double t;
            if (intersect_flash(*sc.flash, ray, t) && (!hit_obj || t < hit.t)) {
                flash_t = t;
                hit_flash = true;
            }
        }

        if (hit_flash) {
            // The flash is a virtual emitter: collect its radiance at the
            // front-facing crossing with the proper MIS weight and keep
            // tracing, so a zero-radiance flash leaves transport untouched.
            Vec3 fn = (ray.at(flash_t) - sc.flash->center) / sc.flash->radius;
            if (dot(ray.d, fn) < 0.0) {
                double w = 1.0;
                if (prev_countable) {
                    double nee_pdf = flash_cone_pdf(*sc.flash, prev_pos);
                    w = power_mis(prev_pdf, nee_pdf);
                }
                L += beta * (sc.flash->radiance * w);
            }
            ray.o = ray.at(flash_t) + ray.d * kRayEps;
            continue;
        }

        if (inside) {
            if (!hit_obj) return L;  // numerical leak through the boundary
            if (has_medium) {
                int hero = int(rng.next_below(3));
                double sigma_h = sigma_t[hero];
                double u = rng.next_double();
                double d = sigma_h > 0.0 ? -std::log1p(-u) / sigma_h
                                         : std::numeric_limits<double>::infinity();
                if (!scattered || ps.mode != TraceMode::SingleScatter) {
                    if (d < hit.t) {
                        // Volume event: spectral balance-heuristic MIS over
                        // the three channel strategies.
                        double pdf_bar = 0.0;
                        for (int c = 0; c < 3; ++c)
                            pdf_bar += sigma_t[c] * std::exp(-sigma_t[c] * d);
                        pdf_bar /= 3.0;
                        if (!(pdf_bar > 0.0)) return L;
                        Spectrum att = transmittance(sigma_t, d);
                        beta = beta * (att * sigma_s) / pdf_bar;
                        if (ps.mode == TraceMode::SingleScatter && scattered) return L;
                        Vec3 p = ray.at(d);
                        PhaseSample phase = sample_hg(sc.sss.g, ray.d, rng);
                        // f_p / pdf == 1 for exact inversion
                        ray = Ray{p, phase.direction, 1e-9};
                        scattered = true;
                        prev_countable = false;
                        if (beta.max_channel() <= 0.0) return L;
                        continue;
                    }
                    double p_surf = 0.0;
                    for (int c = 0; c < 3; ++c) p_surf += std::exp(-sigma_t[c] * hit.t);
                    p_surf /= 3.0;
                    beta = beta * transmittance(sigma_t, hit.t) / p_surf;
                } else {
                    // Post-scatter segment in SingleScatter mode attenuates
                    // deterministically; no further events.
                    beta = beta * transmittance(sigma_t, hit.t);
                }
            } else if (ps.mode == TraceMode::SingleScatter) {
                return L;  // no medium means no scatter can ever happen
            }
        } else {
            if (!hit_obj) {
                if (ps.mode == TraceMode::SingleScatter && !scattered) return L;
                if (ps.mode != TraceMode::SingleScatter || scattered)
                    L += beta * sc.env.eval(ray.d);
                return L;
            }
        }

        // Boundary interaction.
        const Vec3 n = hit.normal;
        const Vec3 wo = -ray.d;
        const Vec3 local = normalize(hit.position - ps.obj_centroid);
        const double rough = sc.rough.at(local);

        if (ps.eta == 1.0) {
            // Index matched: the interface vanishes.
            inside = dot(ray.d, n) < 0.0;
            ray = Ray{hit.position + ray.d * kRayEps, ray.d, kRayEps};
            prev_countable = false;
            continue;
        }

        if (ps.mode == TraceMode::SingleScatter) {
            // Forced transmission across a smooth interface.
            double cos_o = dot(wo, n);
            double f = fresnel_dielectric(cos_o, ps.eta);
            if (f >= 1.0) return L;  // TIR exit: restricted path dies
            Vec3 wt;
            if (!refract(wo, n, ps.eta, wt)) return L;
            double eta_prev = cos_o > 0.0 ? 1.0 : ps.eta;
            double eta_next = cos_o > 0.0 ? ps.eta : 1.0;
            beta *= (1.0 - f) * sqr(eta_prev / eta_next);
            if (scattered) {
                // Exit reached after the single scatter: collect and stop.
                return L + beta * sc.env.eval(wt);
            }
            inside = dot(wt, n) < 0.0;
            ray = Ray{hit.position + wt * kRayEps, wt, kRayEps};
            continue;
        }

        // Next-event estimation toward the flash sphere from exterior
        // reflection-capable vertices (interior vertices cannot connect
        // through the refractive boundary).
        bool exterior_vertex = dot(wo, n) > 0.0;
        bool countable = has_flash && exterior_vertex && rough >= kSmoothRough;
        if (countable) {
            double nee_pdf = flash_cone_pdf(*sc.flash, hit.position);
            if (nee_pdf > 0.0) {
                Vec3 to_c = sc.flash->center - hit.position;
                double dc = length(to_c);
                double cos_max = std::sqrt(1.0 - sqr(sc.flash->radius / dc));
                Frame cone(to_c / dc);
                double u1 = rng.next_double(), u2 = rng.next_double();
                double ct = 1.0 - u1 * (1.0 - cos_max);
                Vec3 wi = cone.to_world(spherical_direction(ct, kTwoPi * u2));
                if (dot(wi, n) > 0.0) {
                    Ray shadow{hit.position + n * kRayEps, wi, kRayEps};
                    double t_flash;
                    SurfaceHit block;
                    bool blocked = intersect_geometry(sc.geometry, shadow, block) &&
                                   (!intersect_flash(*sc.flash, shadow, t_flash) ||
                                    block.t < t_flash);
                    if (!blocked) {
                        BsdfEval be = eval_bsdf(wi, wo, n, rough, ps.eta);
                        if (be.f_r > 0.0) {
                            double bsdf_pdf = pdf_bsdf(wi, wo, n, rough, ps.eta);
                            double w = power_mis(nee_pdf, bsdf_pdf);
                            L += beta * (be.f_r * dot(wi, n) * sc.flash->radiance * w / nee_pdf);
                        }
                    }
                }
            }
        }

        Vec3 wi;
        double pdf = 0.0;
        double weight = 0.0;
        bool delta = false;
        if (rough < kSmoothRough) {
            // Perfect dielectric branch.
            double cos_o = dot(wo, n);
            double f = fresnel_dielectric(cos_o, ps.eta);
            if (rng.next_double() < f) {
                wi = reflect(wo, n);
                weight = 1.0;
            } else {
                if (!refract(wo, n, ps.eta, wi)) return L;
                double eta_prev = cos_o > 0.0 ? 1.0 : ps.eta;
                double eta_next = cos_o > 0.0 ? ps.eta : 1.0;
                weight = sqr(eta_prev / eta_next);
            }
            delta = true;
        } else {
            BsdfSample bs = sample_bsdf(wo, n, rough, ps.eta, rng);
            if (!bs.valid) return L;
            wi = bs.direction;
            pdf = bs.pdf;
            weight = bs.weight;
            delta = bs.delta;
        }
        beta *= weight;
        if (beta.max_channel() <= 0.0) return L;

        prev_countable = countable && !delta;
        prev_pdf = pdf;
        prev_pos = hit.position;

        inside = dot(wi, n) < 0.0;
        Vec3 offset_n = n * std::copysign(kRayEps, dot(wi, n));
        ray = Ray{hit.position + offset_n, wi, kRayEps};

        if (depth >= ps.rr_start) {
            double q = clamp(beta.max_channel(), 0.05, 0.95);
            if (rng.next_double() >= q) return L;
            beta *= 1.0 / q;
        }
    }
    return L;
}

struct CamRays {
    Vec3 pos, right, up, back;
    double tan_half = 0.0, aspect = 0.0;
    int w = 0, h = 0;

    explicit CamRays(const Camera& c) {
        c.validate();
        pos = c.position;
        c.basis(right, up, back);
        tan_half = std::tan(radians(c.vertical_fov) * 0.5);
        aspect = double(c.width) / c.height;
        w = c.width;
        h = c.height;
    }

    Vec3 dir(double px, double py) const {
        double sx = (2.0 * (px + 0.5) / w - 1.0) * tan_half * aspect;
        double sy = (1.0 - 2.0 * (py + 0.5) / h) * tan_half;
        return normalize(right * sx + up * sy - back);
    }
};

}  // namespace

Image trace(const VolumeScene& scene, const TraceConfig& cfg, Image* variance_out) {
    cfg.validate();
    if (cfg.allow_unit_albedo) {
        for (int c = 0; c < 3; ++c)
            if (!(scene.sss.alpha[c] >= 0.0 && scene.sss.alpha[c] <= 1.0))
                throw OutOfRangeError("alpha", scene.sss.alpha[c]);
    } else {
        scene.sss.validate();
    }
    if (!geometry_watertight(scene.geometry))
        throw NotWatertightError("trace: geometry must be watertight for interior transport");

    PathScene ps{&scene, geometry_centroid(scene.geometry), cfg.eta, cfg.mode, cfg.max_bounces,
                 cfg.rr_start};
    CamRays cam(scene.camera);

    Image img(cam.w, cam.h, 3);
    if (variance_out) *variance_out = Image(cam.w, cam.h, 3);

    parallel_for(
        cam.h,
        [&](int64_t y) {
            for (int x = 0; x < cam.w; ++x) {
                const uint64_t pixel_index = uint64_t(y) * cam.w + x;
                double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
                for (int s = 0; s < cfg.spp; ++s) {
                    Rng rng(cfg.seed, pixel_index, uint64_t(s));
                    double jx = cfg.pixel_jitter ? rng.next_double() - 0.5 : 0.0;
                    double jy = cfg.pixel_jitter ? rng.next_double() - 0.5 : 0.0;
                    Ray ray{cam.pos, cam.dir(x + jx, double(y) + jy), 0.0};
                    Spectrum Li = path_radiance(ps, ray, rng);
                    for (int c = 0; c < 3; ++c) {
                        sum[c] += Li[c];
                        sum2[c] += Li[c] * Li[c];
                    }
                }
                for (int c = 0; c < 3; ++c) {
                    double mean = sum[c] / cfg.spp;
                    img.at(x, int(y), c) = float(mean);
                    if (variance_out && cfg.spp > 1) {
                        double var = (sum2[c] - cfg.spp * mean * mean) / (cfg.spp - 1.0);
                        variance_out->at(x, int(y), c) = float(std::max(var, 0.0) / cfg.spp);
                    }
                }
            }
        },
        cfg.threads);
    return img;
}

void render_scene_pair(const VolumeScene& scene, const TraceConfig& cfg, double jitter_deg,
                       uint64_t jitter_seed, Image& flash_img, Image& noflash_img) {
    TraceConfig flash_cfg = cfg;
    flash_cfg.seed = mix64(cfg.seed ^ 0x666c617368ULL);
    flash_img = trace(scene, flash_cfg);

    VolumeScene noflash = scene;
    noflash.flash.reset();
    if (jitter_deg != 0.0) {
        Rng rng(jitter_seed, 0x6a69747465ULL, 0);
        double z = 1.0 - 2.0 * rng.next_double();
        double phi = kTwoPi * rng.next_double();
        Vec3 axis = spherical_direction(z, phi);
        Vec3 view = noflash.camera.look_at - noflash.camera.position;
        double a = radians(jitter_deg);
        Vec3 rotated = view * std::cos(a) + cross(axis, view) * std::sin(a) +
                       axis * dot(axis, view) * (1.0 - std::cos(a));
        noflash.camera.look_at = noflash.camera.position + rotated;
    }
    TraceConfig noflash_cfg = cfg;
    noflash_cfg.seed = mix64(cfg.seed ^ 0x6e6f666c617368ULL);
    noflash_img = trace(noflash, noflash_cfg);
}

Image render_sss_sphere(const SssParams& sss, const EnvLight& env, const TraceConfig& cfg) {
    VolumeScene scene;
    scene.geometry = Sphere{Vec3{0, 0, 0}, 0.25};
    scene.rough.constant = 0.05;
    scene.sss = sss;
    scene.env = env;
    scene.camera = Camera{};
    return trace(scene, cfg);
}

Image single_scatter_reference(const Sphere& sphere, const SssParams& sss, const EnvLight& env,
                               const Camera& camera, int n_ray, int n_cos, int n_phi, int x0,
                               int y0, int x1, int y1) {
    CamRays cam(camera);
    if (x1 <= 0) x1 = cam.w;
    if (y1 <= 0) y1 = cam.h;
    Image img(cam.w, cam.h, 3);

    const double eta = kDefaultIor;
    const Spectrum sigma_t = sss.sigma_t;
    const Spectrum sigma_s = sss.sigma_s();

    std::vector<double> cos_nodes, cos_weights;
    gauss_legendre_ab(n_cos, -1.0, 1.0, cos_nodes, cos_weights);

    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            Ray ray{cam.pos, cam.dir(x, y), 0.0};
            SurfaceHit entry;
            if (!intersect_sphere(sphere, ray, entry)) continue;

            double cos_i = dot(-ray.d, entry.normal);
            double f1 = fresnel_dielectric(cos_i, eta);
            Vec3 t_dir;
            if (!refract(-ray.d, entry.normal, eta, t_dir)) continue;
            double chord = 2.0 * sphere.radius * (-dot(t_dir, entry.normal));
            if (chord <= 0.0) continue;
            double weight0 = (1.0 - f1) / (eta * eta);

            std::vector<double> s_nodes, s_weights;
            gauss_legendre_ab(n_ray, 0.0, chord, s_nodes, s_weights);

            Spectrum total(0.0);
            for (int k = 0; k < n_ray; ++k) {
                Vec3 p = entry.position + t_dir * s_nodes[size_t(k)];
                Frame frame(t_dir);
                Spectrum j_val(0.0);
                for (int m = 0; m < n_cos; ++m) {
                    double ct = cos_nodes[size_t(m)];
                    double fp = hg_phase(ct, sss.g);
                    for (int pj = 0; pj < n_phi; ++pj) {
                        double phi = kTwoPi * (pj + 0.5) / n_phi;
                        Vec3 w = frame.to_world(spherical_direction(ct, phi));
                        // Distance to the boundary from inside.
                        Vec3 oc = p - sphere.center;
                        double b = dot(oc, w);
                        double c = dot(oc, oc) - sphere.radius * sphere.radius;
                        double ell = -b + std::sqrt(std::max(0.0, b * b - c));
                        Vec3 bpos = p + w * ell;
                        Vec3 bn = (bpos - sphere.center) / sphere.radius;
                        double f2 = fresnel_dielectric(dot(-w, bn), eta);
                        if (f2 >= 1.0) continue;
                        Vec3 w_out;
                        if (!refract(-w, bn, eta, w_out)) continue;
                        Spectrum Lenv = env.eval(w_out) * (eta * eta) * (1.0 - f2);
                        double q = fp * cos_weights[size_t(m)] * (kTwoPi / n_phi);
                        for (int ch = 0; ch < 3; ++ch)
                            j_val[ch] += q * Lenv[ch] * std::exp(-sigma_t[ch] * ell);
                    }
                }
                for (int ch = 0; ch < 3; ++ch)
                    total[ch] += s_weights[size_t(k)] * sigma_s[ch] *
                                 std::exp(-sigma_t[ch] * s_nodes[size_t(k)]) * j_val[ch];
            }
            img.set_pixel(x, y, total * weight0);
        }
    }
    return img;
}

GBuffer rasterize_gbuffer(const VolumeScene& scene, const Camera& camera) {
    CamRays cam(camera);
    Vec3 centroid = geometry_centroid(scene.geometry);
    GBuffer g;
    g.depth = Image(cam.w, cam.h, 1);
    g.normal = Image(cam.w, cam.h, 3);
    g.rough = Image(cam.w, cam.h, 1);
    g.mask = Image(cam.w, cam.h, 1);
    for (int y = 0; y < cam.h; ++y) {
        for (int x = 0; x < cam.w; ++x) {
            Ray ray{cam.pos, cam.dir(x, y), 0.0};
            SurfaceHit hit;
            if (!intersect_geometry(scene.geometry, ray, hit)) continue;
            g.mask.at(x, y) = 1.0f;
            g.depth.at(x, y) = float(hit.t);
            Vec3 n = normalize(hit.normal);
            g.normal.at(x, y, 0) = float(dot(n, cam.right));
            g.normal.at(x, y, 1) = float(dot(n, cam.up));
            g.normal.at(x, y, 2) = float(dot(n, cam.back));
            g.rough.at(x, y) = float(scene.rough.at(normalize(hit.position - centroid)));
        }
    }
    return g;
}

}  // namespace transluce
