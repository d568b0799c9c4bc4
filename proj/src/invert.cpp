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

#include "transluce/invert.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace transluce {

double l1_image(const Image& a, const Image& b, const Image* mask) {
    if (!a.same_shape(b)) throw ShapeMismatchError("l1_image: images disagree on shape");
    if (mask && (mask->width != a.width || mask->height != a.height))
        throw ShapeMismatchError("l1_image: mask shape mismatch");
    double acc = 0.0;
    int64_t count = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (mask && mask->at(x, y) <= 0.5f) continue;
            for (int c = 0; c < a.channels; ++c)
                acc += std::abs(double(a.at(x, y, c)) - double(b.at(x, y, c)));
            count += a.channels;
        }
    }
    if (count == 0) throw MaskEmptyError("l1_image: mask selects no pixels");
    return acc / double(count);
}

double l2_vec(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeMismatchError("l2_vec: length mismatch");
    if (a.empty()) throw ShapeMismatchError("l2_vec: empty vectors");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += sqr(a[i] - b[i]);
    return acc / double(a.size());
}

namespace {

std::vector<double> sh_flat(const Sh3x9& sh) {
    std::vector<double> out(27);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 9; ++j) out[size_t(c * 9 + j)] = sh[c][j];
    return out;
}

std::vector<double> normalized_sh(const Sh3x9& sh, const ParamRanges& r) {
    std::vector<double> out = sh_flat(sh);
    for (double& v : out) v = normalize_scalar(v, -r.shmax, r.shmax);
    return out;
}

std::vector<double> normalized_sss(const SssParams& s, const ParamRanges& r) {
    std::vector<double> out;
    for (int c = 0; c < 3; ++c)
        out.push_back(normalize_scalar(s.sigma_t[c], r.sigma_t_lo, r.sigma_t_hi));
    for (int c = 0; c < 3; ++c) out.push_back(normalize_scalar(s.alpha[c], r.alpha_lo, r.alpha_hi));
    out.push_back(normalize_scalar(s.g, r.g_lo, r.g_hi));
    return out;
}

}  // namespace

LossBreakdown total_loss(const SceneEval& pred, const SceneEval& gt, const LossWeights& w,
                         const Image* mask, const ParamRanges& ranges) {
    if (pred.alter_images.size() != gt.alter_images.size())
        throw ShapeMismatchError("total_loss: altered image counts disagree");
    LossBreakdown out;
    out.depth = w.w_D * l1_image(pred.depth, gt.depth, mask);
    out.normal = w.w_N * l1_image(pred.normal, gt.normal, mask);
    out.rough = w.w_R * l1_image(pred.rough, gt.rough, mask);
    out.flash_image = w.w_If * l1_image(pred.flash_image, gt.flash_image, mask);
    for (size_t k = 0; k < pred.alter_images.size(); ++k)
        out.alter += w.w_alter * l1_image(pred.alter_images[k], gt.alter_images[k], mask);

    out.sh = w.w_sh * l2_vec(normalized_sh(pred.sh, ranges), normalized_sh(gt.sh, ranges));
    out.flash = w.w_i * sqr(normalize_scalar(pred.flash_intensity, ranges.flash_lo,
                                             ranges.flash_hi) -
                            normalize_scalar(gt.flash_intensity, ranges.flash_lo, ranges.flash_hi));
    auto ps = normalized_sss(pred.sss, ranges);
    auto gs = normalized_sss(gt.sss, ranges);
    out.sigma_t = w.w_sigma_t * l2_vec({ps[0], ps[1], ps[2]}, {gs[0], gs[1], gs[2]});
    out.alpha = w.w_alpha * l2_vec({ps[3], ps[4], ps[5]}, {gs[3], gs[4], gs[5]});
    out.g = w.w_g * sqr(ps[6] - gs[6]);

    out.total = out.depth + out.normal + out.rough + out.sh + out.flash + out.sigma_t + out.alpha +
                out.g + out.flash_image + out.alter;
    return out;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const OptimConfig& cfg, const std::vector<uint8_t>* update_mask) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatchError("adam_step: size mismatch");
    state.t += 1;
    const double lr = cfg.lr_at(state.t - 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, state.t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, state.t);
    for (size_t i = 0; i < params.size(); ++i) {
        if (update_mask && !(*update_mask)[i]) continue;
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
        params[i] = clamp(params[i], -1.0, 1.0);
    }
}

namespace {

struct Welford {
    double mean = 0.0, m2 = 0.0;
    int64_t n = 0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / double(n);
        m2 += d * (x - mean);
    }
    double stdev() const { return n > 1 ? std::sqrt(m2 / double(n)) : 0.0; }
};

}  // namespace

MaeReport mae_report(const std::vector<SceneEval>& preds, const std::vector<SceneEval>& gts,
                     const Image* mask, const ParamRanges& ranges) {
    if (preds.empty()) throw EmptyListError("mae_report: empty prediction list");
    if (preds.size() != gts.size()) throw ShapeMismatchError("mae_report: list length mismatch");

    const char* names[] = {"N", "D", "R", "sh", "i", "sigma_t", "alpha", "g"};
    std::array<Welford, 8> phys, norm;

    auto mae_vec = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc / double(a.size());
    };

    for (size_t s = 0; s < preds.size(); ++s) {
        const SceneEval& p = preds[s];
        const SceneEval& g = gts[s];
        phys[0].add(l1_image(p.normal, g.normal, mask));
        phys[1].add(l1_image(p.depth, g.depth, mask));
        phys[2].add(l1_image(p.rough, g.rough, mask));
        phys[3].add(mae_vec(sh_flat(p.sh), sh_flat(g.sh)));
        phys[4].add(std::abs(p.flash_intensity - g.flash_intensity));
        phys[5].add((std::abs(p.sss.sigma_t.r - g.sss.sigma_t.r) +
                     std::abs(p.sss.sigma_t.g - g.sss.sigma_t.g) +
                     std::abs(p.sss.sigma_t.b - g.sss.sigma_t.b)) /
                    3.0);
        phys[6].add((std::abs(p.sss.alpha.r - g.sss.alpha.r) +
                     std::abs(p.sss.alpha.g - g.sss.alpha.g) +
                     std::abs(p.sss.alpha.b - g.sss.alpha.b)) /
                    3.0);
        phys[7].add(std::abs(p.sss.g - g.sss.g));

        // Normalized-space variants (rasters are already unit-scaled-ish and
        // reported as-is; scalar parameters map through the codec).
        norm[0].add(l1_image(p.normal, g.normal, mask));
        norm[1].add(l1_image(p.depth, g.depth, mask));
        norm[2].add(l1_image(p.rough, g.rough, mask));
        norm[3].add(mae_vec(normalized_sh(p.sh, ranges), normalized_sh(g.sh, ranges)));
        norm[4].add(std::abs(normalize_scalar(p.flash_intensity, ranges.flash_lo, ranges.flash_hi) -
                             normalize_scalar(g.flash_intensity, ranges.flash_lo,
                                              ranges.flash_hi)));
        auto pn = normalized_sss(p.sss, ranges);
        auto gn = normalized_sss(g.sss, ranges);
        norm[5].add(mae_vec({pn[0], pn[1], pn[2]}, {gn[0], gn[1], gn[2]}));
        norm[6].add(mae_vec({pn[3], pn[4], pn[5]}, {gn[3], gn[4], gn[5]}));
        norm[7].add(std::abs(pn[6] - gn[6]));
    }

    MaeReport report;
    for (int k = 0; k < 8; ++k) {
        MaeRow row;
        row.group = names[k];
        row.mean_physical = phys[size_t(k)].mean;
        row.std_physical = phys[size_t(k)].stdev();
        row.mean_normalized = norm[size_t(k)].mean;
        row.std_normalized = norm[size_t(k)].stdev();
        report.rows.push_back(row);
    }
    return report;
}

std::string mae_report_text(const MaeReport& report) {
    std::ostringstream os;
    os << "group      physical mean(std)      normalized mean(std)\n";
    for (const MaeRow& r : report.rows) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-10s %.4f(%.4f)          %.4f(%.4f)\n", r.group.c_str(),
                      r.mean_physical, r.std_physical, r.mean_normalized, r.std_normalized);
        os << buf;
    }
    return os.str();
}

std::string FitReport::to_json() const {
    nlohmann::json j;
    j["initial_loss"] = initial_loss;
    j["best_loss"] = best_loss;
    j["steps"] = int(loss_trace.empty() ? 0 : loss_trace.size() - 1);
    j["wall_clock_sec"] = wall_clock_sec;
    j["renders_used"] = renders_used;
    j["diverged"] = diverged;
    j["loss_trace"] = loss_trace;
    nlohmann::json mae;
    for (const auto& [k, v] : param_mae) mae[k] = v;
    j["param_mae"] = mae;
    return j.dump(2) + "\n";
}

void FitReport::write_csv_trace(const std::string& path) const {
    std::ofstream out(path);
    out << "step,loss\n";
    for (size_t i = 0; i < loss_trace.size(); ++i) out << i << "," << loss_trace[i] << "\n";
    if (!out) throw IoError("cannot write loss trace: " + path);
}

// ---------------------------------------------------------------------------
// fit_direct

FitReport fit_direct(const FitDirectInput& input, const FitDirectOptions& options) {
    options.optim.validate();
    const ParamRanges& R = options.ranges;
    const int w = input.geometry.width(), h = input.geometry.height();
    if (input.observed.width != w || input.observed.height != h || input.observed.channels != 3)
        throw ShapeMismatchError("fit_direct: observed image shape mismatch");
    if (input.mask.width != w || input.mask.height != h)
        throw ShapeMismatchError("fit_direct: mask shape mismatch");

    int64_t mask_count = 0;
    for (float m : input.mask.data)
        if (m > 0.5f) ++mask_count;
    if (mask_count == 0) throw MaskEmptyError("fit_direct: empty mask");

    // Optimization state: the full ParamVector layout; only rough/sh/i move.
    ParamLayout layout;
    layout.rough_width = w;
    layout.rough_height = h;
    std::vector<double> params(layout.total_size(), 0.0);
    std::vector<uint8_t> update(layout.total_size(), 0);
    for (size_t i = 0; i < layout.sh_offset() + 28; ++i) update[i] = 1;

    switch (options.init) {
        case FitDirectOptions::Init::Midpoint:
            break;  // all zeros
        case FitDirectOptions::Init::Random: {
            Rng rng(options.optim.init_seed, 0x1417, 0);
            for (size_t i = 0; i < params.size(); ++i)
                if (update[i]) params[i] = 0.8 * (2.0 * rng.next_double() - 1.0);
            break;
        }
        case FitDirectOptions::Init::Provided:
            if (options.provided_init.values.size() != params.size())
                throw ShapeMismatchError("fit_direct: provided init has wrong layout");
            params = options.provided_init.values;
            break;
    }

    GBuffer gb = input.geometry;
    // Optional normal refinement: a raw (unconstrained) raster renormalized
    // into the GBuffer before every render.
    std::vector<double> nraw(size_t(w) * h * 3, 0.0);
    AdamState adam_n;
    if (options.refine_normals) {
        for (size_t i = 0; i < nraw.size(); ++i) nraw[i] = input.geometry.normal.data[i];
        adam_n.init(nraw.size());
    }
    auto realize = [&](const std::vector<double>& p, GBuffer& out) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.rough.at(x, y) = float(clamp(
                    denormalize_scalar(p[size_t(y) * w + x], R.rough_lo, R.rough_hi), 1e-3, 1.0));
        if (options.refine_normals) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    size_t b = (size_t(y) * w + x) * 3;
                    Vec3 m{nraw[b], nraw[b + 1], nraw[b + 2]};
                    Vec3 n = length(m) > 1e-9 ? normalize(m) : Vec3{0.0, 0.0, 1.0};
                    out.normal.at(x, y, 0) = float(n.x);
                    out.normal.at(x, y, 1) = float(n.y);
                    out.normal.at(x, y, 2) = float(n.z);
                }
        }
    };
    auto illum_of = [&](const std::vector<double>& p) {
        Illumination il;
        for (int c = 0; c < 3; ++c)
            for (int j = 0; j < 9; ++j)
                il.sh[c][j] = denormalize_scalar(p[layout.sh_offset() + size_t(c * 9 + j)],
                                                 -R.shmax, R.shmax);
        il.flash_intensity = std::max(
            0.0, denormalize_scalar(p[layout.flash_offset()], R.flash_lo, R.flash_hi));
        return il;
    };

    auto t_start = std::chrono::steady_clock::now();
    FitReport report;
    report.renders_used = 0;

    auto loss_of = [&](const Image& img) { return l1_image(img, input.observed, &input.mask); };

    AdamState adam;
    adam.init(params.size());

    std::vector<double> best = params;
    double best_loss = std::numeric_limits<double>::infinity();
    int over_budget_streak = 0;

    realize(params, gb);
    Image rendered = render_direct(gb, illum_of(params), input.camera, options.threads);
    ++report.renders_used;
    double loss = loss_of(rendered);
    report.initial_loss = loss;
    report.loss_trace.push_back(loss);
    if (loss < best_loss) {
        best_loss = loss;
        best = params;
    }

    const double inv_norm = 1.0 / (double(mask_count) * 3.0);
    for (int step = 0; step < options.optim.steps; ++step) {
        // d l1 / d image: sign of the masked residual.
        Image adjoint(w, h, 3);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (input.mask.at(x, y) <= 0.5f) continue;
                for (int c = 0; c < 3; ++c) {
                    double r = double(rendered.at(x, y, c)) - double(input.observed.at(x, y, c));
                    adjoint.at(x, y, c) = float((r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) *
                                                inv_norm);
                }
            }
        DirectGrads grads = backward_direct(gb, illum_of(params), input.camera, adjoint, R,
                                            options.threads);
        adam_step(params, grads.grads.values, adam, options.optim, &update);
        if (options.refine_normals) {
            // Chain through renormalization: d/d m = (I - n n^T) d/d n / |m|.
            std::vector<double> ngrad(nraw.size(), 0.0);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (input.mask.at(x, y) <= 0.5f) continue;
                    size_t b = (size_t(y) * w + x) * 3;
                    Vec3 m{nraw[b], nraw[b + 1], nraw[b + 2]};
                    double len = length(m);
                    if (len < 1e-9) continue;
                    Vec3 n = m / len;
                    Vec3 gn{grads.d_normal.at(x, y, 0), grads.d_normal.at(x, y, 1),
                            grads.d_normal.at(x, y, 2)};
                    Vec3 gm = (gn - n * dot(n, gn)) / len;
                    ngrad[b] = gm.x;
                    ngrad[b + 1] = gm.y;
                    ngrad[b + 2] = gm.z;
                }
            adam_n.t = adam.t - 1;
            adam_step(nraw, ngrad, adam_n, options.optim, nullptr);
        }

        realize(params, gb);
        rendered = render_direct(gb, illum_of(params), input.camera, options.threads);
        ++report.renders_used;
        loss = loss_of(rendered);
        report.loss_trace.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best = params;
        }
        over_budget_streak = loss > 10.0 * report.initial_loss ? over_budget_streak + 1 : 0;
        if (over_budget_streak >= 50) {
            report.diverged = true;
            break;
        }
    }

    report.best_loss = best_loss;
    report.final_params.layout = layout;
    report.final_params.values = best;
    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (options.gt) {
        GBuffer gbest = input.geometry;
        realize(best, gbest);
        Illumination il = illum_of(best);
        double mae_r = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (input.mask.at(x, y) > 0.5f)
                    mae_r += std::abs(double(gbest.rough.at(x, y)) -
                                      double(options.gt->rough.at(x, y)));
        report.param_mae.emplace_back("rough_mae", mae_r / double(mask_count));
        double sh_num = 0.0, sh_den = 0.0;
        for (int c = 0; c < 3; ++c)
            for (int j = 0; j < 9; ++j) {
                sh_num += sqr(il.sh[c][j] - options.gt->sh[c][j]);
                sh_den += sqr(options.gt->sh[c][j]);
            }
        report.param_mae.emplace_back("sh_rel_l2", std::sqrt(sh_num / std::max(sh_den, 1e-12)));
        report.param_mae.emplace_back(
            "i_rel", std::abs(il.flash_intensity - options.gt->flash_intensity) /
                         std::max(options.gt->flash_intensity, 1e-12));
    }
    return report;
}

// ---------------------------------------------------------------------------
// fit_sss

namespace {

struct SssPack {
    // Normalized order: sigma_t rgb, alpha rgb, g, i.
    static constexpr int kN = 8;

    static std::vector<double> pack(const SssParams& s, double flash, const ParamRanges& r) {
        std::vector<double> out = normalized_sss(s, r);
        out.push_back(normalize_scalar(flash, r.flash_lo, r.flash_hi));
        return out;
    }

    static void unpack(const std::vector<double>& v, const ParamRanges& r, SssParams& s,
                       double& flash) {
        for (int c = 0; c < 3; ++c)
            s.sigma_t[c] = std::max(0.0, denormalize_scalar(v[size_t(c)], r.sigma_t_lo,
                                                            r.sigma_t_hi));
        for (int c = 0; c < 3; ++c)
            s.alpha[c] = clamp(denormalize_scalar(v[size_t(3 + c)], r.alpha_lo, r.alpha_hi), 0.0,
                               0.999);
        s.g = clamp(denormalize_scalar(v[6], r.g_lo, r.g_hi), -0.999, 0.999);
        flash = std::max(0.0, denormalize_scalar(v[7], r.flash_lo, r.flash_hi));
    }
};

}  // namespace

FitReport fit_sss(const FitSssInput& input, const FitSssOptions& options) {
    options.optim.validate();
    if (options.fd_step < 1e-4)
        throw StepTooSmallError("fit_sss: fd_step below 1e-4 in normalized space");
    const ParamRanges& R = options.ranges;
    const bool two_shot = !input.observed_noflash.empty();

    // Coarse-resolution working copies of the observations.
    auto shrink = [&](const Image& src) {
        if (src.width == options.coarse_res && src.height == options.coarse_res) return src;
        Image out(options.coarse_res, options.coarse_res, src.channels);
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                int sx = std::min(src.width - 1, x * src.width / out.width);
                int sy = std::min(src.height - 1, y * src.height / out.height);
                for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
            }
        return out;
    };
    Image obs_flash = shrink(input.observed_flash);
    Image obs_noflash = two_shot ? shrink(input.observed_noflash) : Image{};
    Image mask = input.mask.empty() ? Image{} : shrink(input.mask);
    const Image* mask_ptr = mask.empty() ? nullptr : &mask;

    VolumeScene scene = input.scene;
    scene.camera.width = options.coarse_res;
    scene.camera.height = options.coarse_res;

    std::vector<double> params;
    switch (options.init) {
        case FitSssOptions::Init::Midpoint:
            params.assign(SssPack::kN, 0.0);
            break;
        case FitSssOptions::Init::Random: {
            Rng rng(options.optim.init_seed, 0x55, 0);
            params.resize(SssPack::kN);
            for (double& p : params) p = 0.8 * (2.0 * rng.next_double() - 1.0);
            break;
        }
        case FitSssOptions::Init::Provided:
            params = SssPack::pack(options.provided_sss, options.provided_flash, R);
            break;
    }

    std::vector<uint8_t> update(SssPack::kN, 1);
    if (!options.fit_g) update[6] = 0;
    if (!options.fit_flash_intensity) update[7] = 0;

    auto t_start = std::chrono::steady_clock::now();
    FitReport report;

    // Renders with common random numbers: the probe seed is fixed per step,
    // so finite differences subtract correlated noise.
    auto render_pair_loss = [&](const std::vector<double>& p, uint64_t seed, int spp) {
        SssParams sss;
        double flash;
        SssPack::unpack(p, R, sss, flash);
        VolumeScene probe = scene;
        probe.sss = sss;
        if (probe.flash) probe.flash->radiance = flash;
        TraceConfig cfg;
        cfg.spp = spp;
        cfg.seed = seed;
        cfg.max_bounces = 32;
        cfg.rr_start = 5;
        cfg.threads = options.threads;
        double loss = l1_image(trace(probe, cfg), obs_flash, mask_ptr);
        ++report.renders_used;
        if (two_shot) {
            VolumeScene noflash = probe;
            noflash.flash.reset();
            TraceConfig ncfg = cfg;
            ncfg.seed = mix64(seed ^ 0x6e6fULL);
            loss += l1_image(trace(noflash, ncfg), obs_noflash, mask_ptr);
            ++report.renders_used;
        }
        return loss;
    };

    AdamState adam;
    adam.init(params.size());
    std::vector<double> best = params;
    double best_loss = std::numeric_limits<double>::infinity();
    int over_budget_streak = 0;

    double loss = render_pair_loss(params, mix64(options.optim.init_seed ^ 0x10551ULL), options.spp);
    report.initial_loss = loss;
    report.loss_trace.push_back(loss);
    best_loss = loss;

    for (int step = 0; step < options.optim.steps; ++step) {
        uint64_t probe_seed = mix64(options.optim.init_seed ^ (0xf0d0ULL + uint64_t(step)));
        std::vector<double> grads(params.size(), 0.0);
        for (size_t k = 0; k < params.size(); ++k) {
            if (!update[k]) continue;
            std::vector<double> pp = params, pm = params;
            pp[k] = clamp(pp[k] + options.fd_step, -1.0, 1.0);
            pm[k] = clamp(pm[k] - options.fd_step, -1.0, 1.0);
            double span = pp[k] - pm[k];
            if (span <= 0.0) continue;
            double lp = render_pair_loss(pp, probe_seed, options.fd_spp);
            double lm = render_pair_loss(pm, probe_seed, options.fd_spp);
            grads[k] = (lp - lm) / span;
        }
        adam_step(params, grads, adam, options.optim, &update);

        loss = render_pair_loss(params, mix64(options.optim.init_seed ^ 0x10551ULL), options.spp);
        report.loss_trace.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best = params;
        }
        over_budget_streak = loss > 10.0 * report.initial_loss ? over_budget_streak + 1 : 0;
        if (over_budget_streak >= 50) {
            report.diverged = true;
            break;
        }
    }

    report.best_loss = best_loss;
    // Map the 8-scalar pack into the standard layout (empty rough raster).
    report.final_params.layout = ParamLayout{};
    report.final_params.values.assign(report.final_params.layout.total_size(), 0.0);
    for (int c = 0; c < 3; ++c) {
        report.final_params.values[report.final_params.layout.sigma_t_offset() + size_t(c)] =
            best[size_t(c)];
        report.final_params.values[report.final_params.layout.alpha_offset() + size_t(c)] =
            best[size_t(3 + c)];
    }
    report.final_params.values[report.final_params.layout.g_offset()] = best[6];
    report.final_params.values[report.final_params.layout.flash_offset()] = best[7];
    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

}  // namespace transluce
