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

#include "transluce/direct.hpp"

#include "transluce/bsdf.hpp"
#include "transluce/dual.hpp"
#include "transluce/geometry.hpp"
#include "transluce/parallel.hpp"

namespace transluce {

namespace {

constexpr double kEmitterFactor = kPi * kFlashRadius * kFlashRadius;
// Clamp-adjacency margins for the kink mask. Geometric cosines move only
// with the depth/normal rasters (probed at ~1e-5), radiometric clamp
// arguments also move with sh/rough/flash probes at step 1e-3 times their
// range scaling, so they need the wider margin to keep finite differences
// off the max(.,0) corners.
constexpr double kKinkCosEps = 1e-3;
constexpr double kKinkRadEps = 0.02;
constexpr double kDegenerateCos = 1e-7;

/// Diffuse transport scale: transmission albedo at normal incidence.
double transmission_albedo() {
    static const double t0 = 1.0 - fresnel_dielectric(1.0, kDefaultIor);
    return t0;
}

int sh_band_of(int j) { return j == 0 ? 0 : (j < 4 ? 1 : 2); }

struct CameraFrame {
    Vec3 pos, right, up, back, flash;
    double tan_half = 0.0, aspect = 0.0;
    int width = 0, height = 0;
};

CameraFrame make_frame(const Camera& camera) {
    CameraFrame f;
    f.pos = camera.position;
    camera.basis(f.right, f.up, f.back);
    f.tan_half = std::tan(radians(camera.vertical_fov) * 0.5);
    f.aspect = double(camera.width) / camera.height;
    f.width = camera.width;
    f.height = camera.height;
    f.flash = camera.position + f.back * kFlashBackoff;
    return f;
}

Vec3 ray_dir(const CameraFrame& f, double px, double py) {
    double sx = (2.0 * (px + 0.5) / f.width - 1.0) * f.tan_half * f.aspect;
    double sy = (1.0 - 2.0 * (py + 0.5) / f.height) * f.tan_half;
    return normalize(f.right * sx + f.up * sy - f.back);
}

// Minimal generic 3-vector over the shading scalar type.
template <typename S>
struct V3 {
    S x, y, z;
};

template <typename S>
V3<S> make_v3(const Vec3& v) {
    return {S(v.x), S(v.y), S(v.z)};
}

template <typename S>
V3<S> operator+(const V3<S>& a, const V3<S>& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <typename S>
V3<S> operator-(const V3<S>& a, const V3<S>& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <typename S>
V3<S> operator*(const V3<S>& a, const S& s) {
    return {a.x * s, a.y * s, a.z * s};
}
template <typename S>
S dot3(const V3<S>& a, const V3<S>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename S>
struct PixelShade {
    S L[3];
    S flash_unit;        // flash radiance at i = 1
    S diff_basis[9];     // pre-indicator d(diffuse term)/d c_j
    S spec_basis[9];     // d(specular sh term)/d c_j
    S irr_raw[3];
    S raw[3];
    bool kink = false;
};

// Dielectric Fresnel from the outside: no total internal reflection branch.
template <typename S>
S fresnel_outside(const S& cos_i, double eta) {
    using namespace dualmath;
    S ci = abs(cos_i);
    S sin2_t = (1.0 - ci * ci) / (eta * eta);
    S ct = sqrt(max0(1.0 - sin2_t) + 1e-18);
    S r_s = (ci - eta * ct) / (ci + eta * ct);
    S r_p = (eta * ci - ct) / (eta * ci + ct);
    return 0.5 * (r_s * r_s + r_p * r_p);
}

template <typename S>
S ggx_d(const S& cos_h, const S& rough) {
    S a = rough * rough;
    S a2 = a * a;
    S t = cos_h * cos_h * (a2 - 1.0) + 1.0;
    return a2 / (kPi * t * t);
}

template <typename S>
S smith_g1_sh(const S& cos_wn, const S& rough) {
    using namespace dualmath;
    S c2 = cos_wn * cos_wn;
    S tan2 = max0(1.0 - c2) / c2;
    S a2 = rough * rough;
    a2 = a2 * a2;
    return 2.0 / (1.0 + sqrt(1.0 + a2 * tan2));
}

// The full per-pixel shading formula. S is double for rendering and a Dual
// for local-parameter derivatives; both paths run the identical code.
template <typename S>
PixelShade<S> shade_pixel(const CameraFrame& f, const Vec3& dir, const S& depth, const V3<S>& n_cam,
                          const S& rough, const Sh3x9& sh, double flash_i) {
    using namespace dualmath;
    PixelShade<S> out;

    V3<S> n = make_v3<S>(f.right) * n_cam.x + make_v3<S>(f.up) * n_cam.y +
              make_v3<S>(f.back) * n_cam.z;
    V3<S> w_v = make_v3<S>(-dir);
    V3<S> x = make_v3<S>(f.pos) + make_v3<S>(dir) * depth;
    V3<S> v = make_v3<S>(f.flash) - x;
    S dist2 = dot3(v, v);
    S inv_dist = 1.0 / sqrt(dist2);
    V3<S> w_f = v * inv_dist;

    S cos_f = dot3(n, w_f);
    S cos_v = dot3(n, w_v);
    bool near_kink =
        std::abs(value_of(cos_f)) < kKinkCosEps || std::abs(value_of(cos_v)) < kKinkCosEps;

    // Flash: point-collapsed sphere emitter into the microfacet reflection lobe.
    S flash_base(0.0);
    if (value_of(cos_f) > 0.0 && std::abs(value_of(cos_v)) > kDegenerateCos) {
        V3<S> h_un = w_f + w_v;
        S h_len = sqrt(dot3(h_un, h_un) + 1e-18);
        V3<S> h = h_un * (1.0 / h_len);
        S cos_hn = dot3(h, n);
        S wf_h = dot3(w_f, h);
        S wv_h = dot3(w_v, h);
        near_kink = near_kink || std::abs(value_of(cos_hn)) < kKinkCosEps ||
                    std::abs(value_of(wf_h)) < kKinkCosEps ||
                    std::abs(value_of(wv_h)) < kKinkCosEps;
        if (value_of(cos_hn) > 0.0 && value_of(wf_h) * value_of(cos_f) > 0.0 &&
            value_of(wv_h) * value_of(cos_v) > 0.0) {
            S d = ggx_d(cos_hn, rough);
            S fr = fresnel_outside(wf_h, kDefaultIor);
            S g = smith_g1_sh(cos_f, rough) * smith_g1_sh(cos_v, rough);
            S f_r = fr * d * g / (4.0 * abs(cos_f) * abs(cos_v));
            flash_base = f_r * max0(cos_f) * (kEmitterFactor / dist2);
        }
    }

    // SH basis at the shading normal (polynomial extension, no unit check).
    S y_n[9] = {S(0.28209479177387814),
                0.4886025119029199 * n.y,
                0.4886025119029199 * n.z,
                0.4886025119029199 * n.x,
                1.0925484305920792 * n.x * n.y,
                1.0925484305920792 * n.y * n.z,
                0.31539156525252005 * (3.0 * n.z * n.z - 1.0),
                1.0925484305920792 * n.x * n.z,
                0.5462742152960396 * (n.x * n.x - n.y * n.y)};

    V3<S> w_m = n * (2.0 * cos_v) - w_v;
    S y_m[9] = {S(0.28209479177387814),
                0.4886025119029199 * w_m.y,
                0.4886025119029199 * w_m.z,
                0.4886025119029199 * w_m.x,
                1.0925484305920792 * w_m.x * w_m.y,
                1.0925484305920792 * w_m.y * w_m.z,
                0.31539156525252005 * (3.0 * w_m.z * w_m.z - 1.0),
                1.0925484305920792 * w_m.x * w_m.z,
                0.5462742152960396 * (w_m.x * w_m.x - w_m.y * w_m.y)};

    const double t0_over_pi = transmission_albedo() * kInvPi;
    S f_spec = fresnel_outside(cos_v, kDefaultIor);
    S r2 = rough * rough;
    S damp1 = exp(-2.0 * r2);
    S damp2 = exp(-6.0 * r2);

    for (int j = 0; j < 9; ++j) {
        int band = sh_band_of(j);
        S damp = band == 0 ? S(1.0) : (band == 1 ? damp1 : damp2);
        out.diff_basis[j] = t0_over_pi * sh_irradiance_band_factor(j) * y_n[j];
        out.spec_basis[j] = f_spec * damp * y_m[j];
    }

    for (int c = 0; c < 3; ++c) {
        S irr_raw(0.0);
        S spec(0.0);
        for (int j = 0; j < 9; ++j) {
            irr_raw += sh_irradiance_band_factor(j) * sh[c][j] * y_n[j];
            spec += out.spec_basis[j] * sh[c][j];
        }
        out.irr_raw[c] = irr_raw;
        S raw = flash_i * flash_base + t0_over_pi * max0(irr_raw) + spec;
        out.raw[c] = raw;
        out.L[c] = max0(raw);
        near_kink = near_kink || std::abs(value_of(irr_raw)) < kKinkRadEps ||
                    std::abs(value_of(raw)) < kKinkRadEps;
    }
    out.flash_unit = flash_base;
    out.kink = near_kink;
    return out;
}

using D5 = Dual<5>;

}  // namespace

Vec3 camera_ray_dir(const Camera& camera, double px, double py) {
    return ray_dir(make_frame(camera), px, py);
}

Vec3 flash_center(const Camera& camera) { return make_frame(camera).flash; }

std::vector<Vec3> unproject(const Image& depth, const Camera& camera) {
    camera.validate();
    CameraFrame f = make_frame(camera);
    std::vector<Vec3> out(depth.pixel_count());
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x)
            out[size_t(y) * depth.width + x] =
                f.pos + ray_dir(f, x, y) * double(depth.at(x, y));
    return out;
}

void project_point(const Camera& camera, const Vec3& world, double& px, double& py) {
    CameraFrame f = make_frame(camera);
    Vec3 rel = world - f.pos;
    double zc = -dot(rel, f.back);  // distance along the optical axis
    double xc = dot(rel, f.right);
    double yc = dot(rel, f.up);
    px = (xc / (zc * f.tan_half * f.aspect) + 1.0) * 0.5 * f.width - 0.5;
    py = (1.0 - yc / (zc * f.tan_half)) * 0.5 * f.height - 0.5;
}

std::vector<ShadingContext> make_shading_contexts(const GBuffer& g, const Camera& camera) {
    CameraFrame f = make_frame(camera);
    std::vector<ShadingContext> out(g.depth.pixel_count());
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            ShadingContext& ctx = out[size_t(y) * g.width() + x];
            ctx.masked = g.masked(x, y);
            if (!ctx.masked) continue;
            Vec3 dir = ray_dir(f, x, y);
            ctx.position = f.pos + dir * double(g.depth.at(x, y));
            ctx.view_dir = -dir;
            ctx.normal = f.right * g.normal.at(x, y, 0) + f.up * g.normal.at(x, y, 1) +
                         f.back * g.normal.at(x, y, 2);
            ctx.rough = g.rough.at(x, y);
            Vec3 v = f.flash - ctx.position;
            double d2 = length_squared(v);
            ctx.flash_dir = v / std::sqrt(d2);
            ctx.flash_falloff = 1.0 / d2;
        }
    }
    return out;
}

std::vector<double> render_direct_fp64(const GBuffer& g, const Illumination& illum,
                                       const Camera& camera, bool validate, int threads) {
    if (validate) {
        g.validate();
        illum.validate();
        camera.validate();
        bool any = false;
        for (float m : g.mask.data)
            if (m > 0.5f) {
                any = true;
                break;
            }
        if (!any) throw MaskEmptyError("render_direct: mask has no pixels");
    }
    CameraFrame f = make_frame(camera);
    const int w = g.width(), h = g.height();
    std::vector<double> out(size_t(w) * h * 3, 0.0);
    parallel_for(
        h,
        [&](int64_t y) {
            for (int x = 0; x < w; ++x) {
                if (!g.masked(x, int(y))) continue;
                Vec3 dir = ray_dir(f, x, double(y));
                V3<double> n{g.normal.at(x, int(y), 0), g.normal.at(x, int(y), 1),
                             g.normal.at(x, int(y), 2)};
                PixelShade<double> ps =
                    shade_pixel<double>(f, dir, g.depth.at(x, int(y)), n, g.rough.at(x, int(y)),
                                        illum.sh, illum.flash_intensity);
                size_t base = (size_t(y) * w + x) * 3;
                out[base] = ps.L[0];
                out[base + 1] = ps.L[1];
                out[base + 2] = ps.L[2];
            }
        },
        threads);
    return out;
}

Image render_direct(const GBuffer& g, const Illumination& illum, const Camera& camera,
                    int threads) {
    std::vector<double> buf = render_direct_fp64(g, illum, camera, true, threads);
    Image out(g.width(), g.height(), 3);
    for (size_t i = 0; i < buf.size(); ++i) out.data[i] = float(buf[i]);
    return out;
}

Image relight(const GBuffer& g, const Illumination& new_illum, const Camera& camera, int threads) {
    return render_direct(g, new_illum, camera, threads);
}

DirectGrads backward_direct(const GBuffer& g, const Illumination& illum, const Camera& camera,
                            const Image& adjoint, const ParamRanges& ranges, int threads) {
    g.validate();
    illum.validate();
    camera.validate();
    if (adjoint.width != g.width() || adjoint.height != g.height() || adjoint.channels != 3)
        throw ShapeMismatchError("backward_direct: adjoint shape mismatch");

    const int w = g.width(), h = g.height();
    CameraFrame f = make_frame(camera);

    DirectGrads out;
    out.grads.layout.rough_width = w;
    out.grads.layout.rough_height = h;
    out.grads.values.assign(out.grads.layout.total_size(), 0.0);
    out.d_depth = Image(w, h, 1);
    out.d_normal = Image(w, h, 3);
    out.kink_mask.assign(size_t(w) * h, 0);

    const double rough_scale = (ranges.rough_hi - ranges.rough_lo) * 0.5;
    const double sh_scale = ranges.shmax;  // (2*shmax)/2
    const double flash_scale = (ranges.flash_hi - ranges.flash_lo) * 0.5;

    // Fixed row tiles; shared-parameter partials reduce in tile order below.
    const int tile_rows = 8;
    const int n_tiles = (h + tile_rows - 1) / tile_rows;
    std::vector<std::array<double, 28>> tile_shared(size_t(n_tiles), std::array<double, 28>{});

    parallel_for(
        n_tiles,
        [&](int64_t tile) {
            std::array<double, 28>& shared = tile_shared[size_t(tile)];
            int y0 = int(tile) * tile_rows;
            int y1 = std::min(h, y0 + tile_rows);
            for (int y = y0; y < y1; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!g.masked(x, y)) continue;
                    Vec3 dir = ray_dir(f, x, y);
                    D5 depth = D5::seeded(g.depth.at(x, y), 0);
                    V3<D5> n{D5::seeded(g.normal.at(x, y, 0), 1),
                             D5::seeded(g.normal.at(x, y, 1), 2),
                             D5::seeded(g.normal.at(x, y, 2), 3)};
                    D5 rough = D5::seeded(g.rough.at(x, y), 4);
                    PixelShade<D5> ps = shade_pixel<D5>(f, dir, depth, n, rough, illum.sh,
                                                        illum.flash_intensity);
                    const size_t px = size_t(y) * w + x;
                    if (ps.kink) out.kink_mask[px] = 1;

                    double local[5] = {0, 0, 0, 0, 0};
                    for (int c = 0; c < 3; ++c) {
                        double a = adjoint.at(x, y, c);
                        if (a == 0.0) continue;
                        for (int k = 0; k < 5; ++k) local[k] += a * ps.L[c].d[k];
                        if (ps.raw[c].v > 0.0) {
                            shared[27] += a * ps.flash_unit.v;
                            const double irr_on = ps.irr_raw[c].v > 0.0 ? 1.0 : 0.0;
                            for (int j = 0; j < 9; ++j)
                                shared[c * 9 + j] += a * (irr_on * ps.diff_basis[j].v +
                                                          ps.spec_basis[j].v);
                        }
                    }
                    out.d_depth.at(x, y) = float(local[0]);
                    out.d_normal.at(x, y, 0) = float(local[1]);
                    out.d_normal.at(x, y, 1) = float(local[2]);
                    out.d_normal.at(x, y, 2) = float(local[3]);
                    out.grads.values[px] = local[4] * rough_scale;
                }
            }
        },
        threads);

    std::array<double, 28> shared{};
    for (int t = 0; t < n_tiles; ++t)
        for (int k = 0; k < 28; ++k) shared[k] += tile_shared[size_t(t)][k];

    const size_t sh_off = out.grads.layout.sh_offset();
    for (int k = 0; k < 27; ++k) out.grads.values[sh_off + k] = shared[k] * sh_scale;
    out.grads.values[out.grads.layout.flash_offset()] = shared[27] * flash_scale;
    return out;
}

namespace {

double adjoint_dot(const std::vector<double>& img, const Image& adjoint) {
    double acc = 0.0;
    for (size_t i = 0; i < img.size(); ++i) acc += img[i] * double(adjoint.data[i]);
    return acc;
}

}  // namespace

GradVector finite_diff_grads(const GBuffer& g, const Illumination& illum, const Camera& camera,
                             const Image& adjoint, double step, const ParamRanges& ranges,
                             int threads) {
    if (!(step > 0.0)) throw InvalidArgumentError("finite_diff_grads: step must be > 0");
    GradVector out;
    out.layout.rough_width = g.width();
    out.layout.rough_height = g.height();
    out.values.assign(out.layout.total_size(), 0.0);

    const double rough_scale = (ranges.rough_hi - ranges.rough_lo) * 0.5;

    // Roughness raster: shading is pixel-local, so one +/- probe pair moves
    // every pixel at once and per-pixel differences read off per-parameter
    // derivatives.
    {
        GBuffer gp = g, gm = g;
        for (size_t i = 0; i < g.rough.data.size(); ++i) {
            gp.rough.data[i] = float(g.rough.data[i] + step * rough_scale);
            gm.rough.data[i] = float(g.rough.data[i] - step * rough_scale);
        }
        std::vector<double> ip = render_direct_fp64(gp, illum, camera, false, threads);
        std::vector<double> im = render_direct_fp64(gm, illum, camera, false, threads);
        for (int y = 0; y < g.height(); ++y)
            for (int x = 0; x < g.width(); ++x) {
                double acc = 0.0;
                size_t base = (size_t(y) * g.width() + x) * 3;
                for (int c = 0; c < 3; ++c)
                    acc += (ip[base + c] - im[base + c]) * double(adjoint.at(x, y, c));
                out.values[size_t(y) * g.width() + x] = acc / (2.0 * step);
            }
    }

    // SH and flash intensity: scalar probes in normalized space.
    for (int k = 0; k < 28; ++k) {
        Illumination ip = illum, im = illum;
        double scale;
        if (k < 27) {
            scale = ranges.shmax;
            ip.sh[k / 9][k % 9] += step * scale;
            im.sh[k / 9][k % 9] -= step * scale;
        } else {
            scale = (ranges.flash_hi - ranges.flash_lo) * 0.5;
            ip.flash_intensity += step * scale;
            im.flash_intensity -= step * scale;
        }
        std::vector<double> bp = render_direct_fp64(g, ip, camera, false, threads);
        std::vector<double> bm = render_direct_fp64(g, im, camera, false, threads);
        double d = (adjoint_dot(bp, adjoint) - adjoint_dot(bm, adjoint)) / (2.0 * step);
        size_t idx = k < 27 ? out.layout.sh_offset() + k : out.layout.flash_offset();
        out.values[idx] = d;
    }
    return out;
}

void finite_diff_raster_grads(const GBuffer& g, const Illumination& illum, const Camera& camera,
                              const Image& adjoint, double step, Image& d_depth, Image& d_normal,
                              int threads) {
    d_depth = Image(g.width(), g.height(), 1);
    d_normal = Image(g.width(), g.height(), 3);
    auto probe = [&](auto&& bump_plus, auto&& bump_minus, auto&& write) {
        GBuffer gp = g, gm = g;
        bump_plus(gp);
        bump_minus(gm);
        std::vector<double> ip = render_direct_fp64(gp, illum, camera, false, threads);
        std::vector<double> im = render_direct_fp64(gm, illum, camera, false, threads);
        for (int y = 0; y < g.height(); ++y)
            for (int x = 0; x < g.width(); ++x) {
                double acc = 0.0;
                size_t base = (size_t(y) * g.width() + x) * 3;
                for (int c = 0; c < 3; ++c)
                    acc += (ip[base + c] - im[base + c]) * double(adjoint.at(x, y, c));
                write(x, y, acc / (2.0 * step));
            }
    };
    probe([&](GBuffer& gb) {
              for (float& d : gb.depth.data) d += float(step);
          },
          [&](GBuffer& gb) {
              for (float& d : gb.depth.data) d -= float(step);
          },
          [&](int x, int y, double v) { d_depth.at(x, y) = float(v); });
    for (int comp = 0; comp < 3; ++comp) {
        probe([&](GBuffer& gb) {
                  for (size_t i = comp; i < gb.normal.data.size(); i += 3)
                      gb.normal.data[i] += float(step);
              },
              [&](GBuffer& gb) {
                  for (size_t i = comp; i < gb.normal.data.size(); i += 3)
                      gb.normal.data[i] -= float(step);
              },
              [&](int x, int y, double v) { d_normal.at(x, y, comp) = float(v); });
    }
}

void make_random_direct_scene(int res, uint64_t seed, GBuffer& g, Illumination& illum,
                              Camera& camera) {
    Rng rng(seed, 0x7e57u, 0);
    camera = Camera{};
    camera.width = res;
    camera.height = res;

    // Randomly placed sphere blob rasterized analytically: smooth depth and
    // exact camera-facing normals away from the silhouette.
    double radius = 0.16 + 0.10 * rng.next_double();
    Vec3 center{0.06 * (rng.next_double() - 0.5), 0.06 * (rng.next_double() - 0.5),
                0.05 * (rng.next_double() - 0.5)};
    CameraFrame f = make_frame(camera);

    g.depth = Image(res, res, 1);
    g.normal = Image(res, res, 3);
    g.rough = Image(res, res, 1);
    g.mask = Image(res, res, 1);

    // Roughness stays above the near-singular GGX regime (alpha = r^2 makes
    // curvature explode like 1/r^2, which finite differences at step 1e-3
    // cannot track); the dataset's texture range starts at 0.1 anyway.
    double rough_base = 0.28 + 0.6 * rng.next_double();
    double rough_amp = 0.1 * rng.next_double();
    double phase_x = kTwoPi * rng.next_double();
    double phase_y = kTwoPi * rng.next_double();

    Sphere sphere{center, radius};
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            Ray ray{camera.position, ray_dir(f, x, y)};
            SurfaceHit hit;
            if (!intersect_sphere(sphere, ray, hit)) continue;
            // Drop grazing silhouette pixels; they sit on shading kinks.
            double facing = dot(hit.normal, -ray.d);
            if (facing < 0.12) continue;
            g.mask.at(x, y) = 1.0f;
            g.depth.at(x, y) = float(hit.t);
            g.normal.at(x, y, 0) = float(dot(hit.normal, f.right));
            g.normal.at(x, y, 1) = float(dot(hit.normal, f.up));
            g.normal.at(x, y, 2) = float(dot(hit.normal, f.back));
            double r = rough_base + rough_amp * std::sin(phase_x + 9.0 * double(x) / res) *
                                        std::cos(phase_y + 7.0 * double(y) / res);
            g.rough.at(x, y) = float(clamp(r, 0.15, 1.0));
        }
    }

    for (int j = 0; j < 9; ++j) {
        illum.sh[0][j] = j == 0 ? 1.0 + 1.2 * rng.next_double() : 0.6 * (rng.next_double() - 0.5);
        illum.sh[1][j] = j == 0 ? 1.0 + 1.2 * rng.next_double() : 0.6 * (rng.next_double() - 0.5);
        illum.sh[2][j] = j == 0 ? 1.0 + 1.2 * rng.next_double() : 0.6 * (rng.next_double() - 0.5);
    }
    illum.flash_intensity = 35.0 + 40.0 * rng.next_double();
}

GradCheckResult gradcheck_scene(int res, uint64_t seed, double step, const ParamRanges& ranges,
                                int threads) {
    GBuffer g;
    Illumination illum;
    Camera camera;
    make_random_direct_scene(res, seed, g, illum, camera);

    Image adjoint(res, res, 3);
    Rng rng(seed, 0xad70, 1);
    for (float& a : adjoint.data) a = float(2.0 * rng.next_double() - 1.0);

    // First pass marks clamp-adjacent pixels; both sides then compare on the
    // adjoint restricted to smooth pixels.
    DirectGrads first = backward_direct(g, illum, camera, adjoint, ranges, threads);
    GradCheckResult result;
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x)
            if (first.kink_mask[size_t(y) * res + x]) {
                ++result.kink_pixels;
                for (int c = 0; c < 3; ++c) adjoint.at(x, y, c) = 0.0f;
            }

    DirectGrads analytic = backward_direct(g, illum, camera, adjoint, ranges, threads);
    GradVector fd = finite_diff_grads(g, illum, camera, adjoint, step, ranges, threads);

    const ParamLayout& layout = analytic.grads.layout;
    for (int gi = 0; gi < kParamGroupCount; ++gi) {
        ParamGroup group = ParamGroup(gi);
        size_t off = layout.group_offset(group);
        size_t n = layout.group_size(group);
        double group_scale = 0.0;
        for (size_t k = 0; k < n; ++k)
            group_scale = std::max(group_scale, std::abs(analytic.grads.values[off + k]));
        double worst = 0.0;
        for (size_t k = 0; k < n; ++k) {
            double a = analytic.grads.values[off + k];
            double b = fd.values[off + k];
            double denom = std::max({std::abs(a), std::abs(b), group_scale * 1e-3, 1e-12});
            worst = std::max(worst, std::abs(a - b) / denom);
        }
        result.max_rel_err[gi] = worst;
    }
    return result;
}

}  // namespace transluce
