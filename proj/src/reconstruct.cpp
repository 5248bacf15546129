// SPDX-License-Identifier: Apache-2.0
#include "lapepi/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "lapepi/parallel.hpp"

namespace lapepi {

void ReconConfig::validate() const {
    if (alpha_a < 2) throw Error("alpha_a must be >= 2");
    if (threads < 1) throw Error("threads must be >= 1");
}

namespace {

double keys(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

}  // namespace

Epi angular_interpolate(const Epi& epi, int rate, AngularInterp kind) {
    if (rate < 1) throw Error("angular_interpolate: rate must be >= 1");
    if (epi.n_a() < 1) throw ShapeError("angular_interpolate: empty EPI");
    const int n = epi.n_a();
    const int out_rows = rate * (n - 1) + 1;
    Epi out(out_rows, epi.n_w(), 0.0, epi.axis);
    for (int r = 0; r < out_rows; ++r) {
        const int base = r / rate;
        const double frac = static_cast<double>(r % rate) / rate;
        if (frac == 0.0) {
            for (int w = 0; w < epi.n_w(); ++w) out(r, w) = epi(base, w);
            continue;
        }
        if (kind == AngularInterp::Linear) {
            for (int w = 0; w < epi.n_w(); ++w) out(r, w) = (1.0 - frac) * epi(base, w) + frac * epi(base + 1, w);
            continue;
        }
        double wt[4];
        int idx[4];
        for (int k = 0; k < 4; ++k) {
            idx[k] = std::clamp(base - 1 + k, 0, n - 1);
            wt[k] = keys(frac - (k - 1));
        }
        for (int w = 0; w < epi.n_w(); ++w) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += wt[k] * epi(idx[k], w);
            out(r, w) = s;
        }
    }
    return out;
}

Epi reconstruct_epi(const Epi& epi, const net::NetworkParams& params, const ReconConfig& cfg) {
    cfg.validate();
    if (epi.n_a() < 2) throw Error("reconstruct_epi: the EPI needs at least 2 angular samples");
    SpatialPadding pad;
    const Epi padded = pad_spatial_reflect(epi, params.pyramid.total_factor(), &pad);
    const LapEpiPyramid pyr = build_lapepi(padded, params.pyramid);
    Epi out = crop_spatial(net::forward(pyr, params, nullptr, cfg.alpha_a), pad);
    for (double& v : out.data.values()) v = std::clamp(v, 0.0, 1.0);
    if (cfg.copy_inputs)
        for (int r = 0; r < epi.n_a(); ++r)
            for (int w = 0; w < epi.n_w(); ++w) out(r * cfg.alpha_a, w) = epi(r, w);
    out.axis = epi.axis;
    return out;
}

LightField4D densify_lf3d(const LightField4D& lf, int rate, const std::function<Densifier(int)>& densify, int threads) {
    if (lf.n_t() != 1) throw ShapeError("3-D reconstruction needs n_t == 1");
    if (lf.n_s() < 2) throw ShapeError("3-D reconstruction needs at least 2 views");
    LightField4D out(1, rate * (lf.n_s() - 1) + 1, lf.n_v(), lf.n_u(), lf.channels(), lf.colorspace());
    for (int c = 0; c < lf.channels(); ++c) {
        const Densifier f = densify(c);
        parallel_for(static_cast<std::size_t>(lf.n_v()), threads, [&](std::size_t v) {
            const Epi e = f(extract_epi(lf, EpiAxis::US, static_cast<int>(v), 0, c));
            insert_epi(out, e, EpiAxis::US, static_cast<int>(v), 0, c);
        });
    }
    return out;
}

LightField4D densify_lf4d(const LightField4D& lf, int rate, const std::function<Densifier(int)>& densify, int threads,
                          std::vector<int>* views_written) {
    if (lf.n_s() < 2 || lf.n_t() < 2) throw ShapeError("4-D reconstruction needs at least 2 views along s and t");
    const int ns = rate * (lf.n_s() - 1) + 1;
    const int nt = rate * (lf.n_t() - 1) + 1;
    LightField4D out(nt, ns, lf.n_v(), lf.n_u(), lf.channels(), lf.colorspace());
    std::vector<int> written(static_cast<std::size_t>(nt) * ns, 0);
    // Writes are counted by the v == 0 / u == 0 job of channel 0, which is the
    // only job touching that entry within its pass.
    auto mark = [&](int t, int s) { ++written[static_cast<std::size_t>(t) * ns + s]; };

    // Pass 1a: input rows t_i densified along s give complete output rows rate * t_i.
    // Pass 1b: input columns s_i densified along t fill output columns rate * s_i
    //          except rows already produced by pass 1a.
    // Pass 2: output columns off the lattice densified along t from the pass-1 rows.
    for (int c = 0; c < lf.channels(); ++c) {
        const Densifier f = densify(c);
        parallel_for(static_cast<std::size_t>(lf.n_t()) * lf.n_v(), threads, [&](std::size_t k) {
            const int t = static_cast<int>(k) / lf.n_v(), v = static_cast<int>(k) % lf.n_v();
            const Epi e = f(extract_epi(lf, EpiAxis::US, v, t, c));
            for (int s = 0; s < ns; ++s) {
                if (c == 0 && v == 0) mark(t * rate, s);
                for (int u = 0; u < lf.n_u(); ++u) out.at(t * rate, s, v, u, c) = e(s, u);
            }
        });
        parallel_for(static_cast<std::size_t>(lf.n_s()) * lf.n_u(), threads, [&](std::size_t k) {
            const int s = static_cast<int>(k) / lf.n_u(), u = static_cast<int>(k) % lf.n_u();
            const Epi e = f(extract_epi(lf, EpiAxis::VT, u, s, c));
            for (int t = 0; t < nt; ++t) {
                if (t % rate == 0) continue;
                if (c == 0 && u == 0) mark(t, s * rate);
                for (int v = 0; v < lf.n_v(); ++v) out.at(t, s * rate, v, u, c) = e(t, v);
            }
        });
        // Pass 2 starts after the pass-1 barrier above.
        std::vector<int> off_lattice;
        for (int s = 0; s < ns; ++s)
            if (s % rate != 0) off_lattice.push_back(s);
        parallel_for(off_lattice.size() * static_cast<std::size_t>(lf.n_u()), threads, [&](std::size_t k) {
            const int s = off_lattice[k / static_cast<std::size_t>(lf.n_u())];
            const int u = static_cast<int>(k % static_cast<std::size_t>(lf.n_u()));
            if (c == 0 && u == 0)
                for (int t = 0; t < nt; t += rate)
                    if (written[static_cast<std::size_t>(t) * ns + s] != 1) throw Error("pass 2 read a view before pass 1 wrote it");
            const Epi rows = angular_decimate(extract_epi(out, EpiAxis::VT, u, s, c), rate);
            const Epi e = f(rows);
            for (int t = 0; t < nt; ++t) {
                if (t % rate == 0) continue;
                if (c == 0 && u == 0) mark(t, s);
                for (int v = 0; v < lf.n_v(); ++v) out.at(t, s, v, u, c) = e(t, v);
            }
        });
    }
    for (int w : written)
        if (w != 1) throw Error("4-D reconstruction left a view unwritten or wrote it twice");
    if (views_written) *views_written = std::move(written);
    return out;
}

namespace {

LightField4D to_working_space(const LightField4D& lf, const ReconConfig& cfg) {
    if (cfg.channels == ChannelPolicy::LumaNetwork && lf.colorspace() == ColorSpace::RGB) return rgb_to_ycbcr(lf);
    return lf;
}

LightField4D from_working_space(LightField4D out, const LightField4D& lf) {
    if (lf.colorspace() == ColorSpace::RGB && out.colorspace() == ColorSpace::YCBCR) out = ycbcr_to_rgb(out);
    out.clamp01();
    return out;
}

std::function<Densifier(int)> network_densifier(const LightField4D& work, const net::NetworkParams& params,
                                                const ReconConfig& cfg) {
    const bool luma_only = cfg.channels == ChannelPolicy::LumaNetwork && work.channels() > 1;
    return [&params, cfg, luma_only](int c) -> Densifier {
        if (luma_only && c > 0) {
            const int rate = cfg.alpha_a;
            return [rate](const Epi& e) { return angular_interpolate(e, rate, AngularInterp::Linear); };
        }
        return [&params, cfg](const Epi& e) { return reconstruct_epi(e, params, cfg); };
    };
}

}  // namespace

LightField4D reconstruct_lf3d(const LightField4D& lf, const net::NetworkParams& params, const ReconConfig& cfg) {
    cfg.validate();
    const LightField4D work = to_working_space(lf, cfg);
    return from_working_space(densify_lf3d(work, cfg.alpha_a, network_densifier(work, params, cfg), cfg.threads), lf);
}

LightField4D reconstruct_lf4d(const LightField4D& lf, const net::NetworkParams& params, const ReconConfig& cfg) {
    cfg.validate();
    const LightField4D work = to_working_space(lf, cfg);
    return from_working_space(densify_lf4d(work, cfg.alpha_a, network_densifier(work, params, cfg), cfg.threads), lf);
}

LightField4D interpolate_lf(const LightField4D& lf, int rate, AngularInterp kind, int threads) {
    auto f = [rate, kind](int) -> Densifier {
        return [rate, kind](const Epi& e) { return angular_interpolate(e, rate, kind); };
    };
    LightField4D out = lf.n_t() == 1 ? densify_lf3d(lf, rate, f, threads) : densify_lf4d(lf, rate, f, threads);
    out.clamp01();
    return out;
}

const std::vector<int>& supported_strides() {
    static const std::vector<int> s{2, 3, 4, 8};
    return s;
}

namespace {

// Shortest sequence of supported strides whose product is `n`; prefers larger
// first strides among equally short cascades.
bool factorize(int n, int depth, std::vector<int>& out) {
    if (n == 1) return true;
    if (depth == 0) return false;
    auto strides = supported_strides();
    std::sort(strides.rbegin(), strides.rend());
    for (int s : strides)
        if (n % s == 0) {
            out.push_back(s);
            if (factorize(n / s, depth - 1, out)) return true;
            out.pop_back();
        }
    return false;
}

}  // namespace

UpscaleResult upscale_multi(const Epi& epi, const net::NetworkParams& params, int target_rate, ReconConfig cfg) {
    if (target_rate < 2) throw Error("upscale_multi: target rate must be >= 2");
    UpscaleResult r;
    for (int depth = 1; depth <= 8 && r.passes.empty(); ++depth) factorize(target_rate, depth, r.passes);
    if (r.passes.empty())
        throw Error("upscale_multi: rate " + std::to_string(target_rate) + " is not a product of supported strides");
    r.epi = epi;
    for (int s : r.passes) {
        cfg.alpha_a = s;
        r.epi = reconstruct_epi(r.epi, params, cfg);
    }
    if (r.passes.size() == 1) {
        r.mode = "single:" + std::to_string(r.passes[0]);
    } else {
        r.mode = "cascade:";
        for (std::size_t i = 0; i < r.passes.size(); ++i) r.mode += (i ? "x" : "") + std::to_string(r.passes[i]);
    }
    return r;
}

}  // namespace lapepi
