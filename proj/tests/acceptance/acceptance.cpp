// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance checks, one tagged PASS/FAIL line per criterion.
// Usage: lapepi_acceptance [--criterion N]... [--workdir DIR]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "lapepi/fourier.hpp"
#include "lapepi/image_io.hpp"
#include "lapepi/metrics.hpp"
#include "lapepi/pyramid.hpp"
#include "lapepi/reconstruct.hpp"
#include "lapepi/synth.hpp"
#include "lapepi/train.hpp"

using namespace lapepi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path g_workdir;

// ---------------------------------------------------------------- C1
Outcome pyramid_exactness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> rows(8, 64), cols(32, 128);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Epi e = oracle::random_epi(rng, rows(rng), cols(rng));
        const PyramidConfig cfg;
        SpatialPadding pad;
        const Epi padded = pad_spatial_reflect(e, cfg.total_factor(), &pad);
        const Epi back = crop_spatial(collapse(build_lapepi(padded, cfg)), pad);
        worst = std::max(worst, max_abs_diff(back.data, e.data));
    }
    const double sec = seconds_since(t0);
    return {worst <= 1e-12 && sec < 10.0, "max abs error " + fmt("%.3g", worst) + ", " + fmt("%.2f", sec) + " s"};
}

// ---------------------------------------------------------------- C2
Outcome fourier_trend() {
    const auto t0 = Clock::now();
    const Epi toy = synth_epi(toy_epi_scene(63, 216, 9.0));
    const std::vector<double> betas{10, 50, 100, 300};
    const AliasReport rep = sweep(toy, {1, 2, 4}, betas, 3, 9.0);
    bool ok = rep.rows.size() == 12;
    std::ostringstream d;
    for (std::size_t b = 0; ok && b < betas.size(); ++b) {
        const AliasRow &s1 = rep.rows[b], &s2 = rep.rows[b + 4], &s4 = rep.rows[b + 8];
        const bool mono = s2.sigma <= s1.sigma && s4.sigma <= s2.sigma && s2.kernel_size <= s1.kernel_size &&
                          s4.kernel_size <= s2.kernel_size;
        const double drop = static_cast<double>(s1.kernel_size) / s4.kernel_size;
        ok = ok && mono && drop > 4.0;
        d << "b" << betas[b] << ": sigma " << fmt("%.3g", s1.sigma) << "/" << fmt("%.3g", s2.sigma) << "/"
          << fmt("%.3g", s4.sigma) << " k " << s1.kernel_size << "/" << s2.kernel_size << "/" << s4.kernel_size
          << " drop " << fmt("%.1f", drop) << "x; ";
    }
    const double sec = seconds_since(t0);
    d << fmt("%.2f", sec) << " s";
    return {ok && sec < 30.0, d.str()};
}

// ---------------------------------------------------------------- C3
// Circular spatial convolution with a sampled, wrapped, unit-sum Gaussian.
Epi gaussian_filter_periodic(const Epi& e, double sigma) {
    const int n = e.n_w();
    std::vector<double> g(static_cast<std::size_t>(n), 0.0);
    const int reach = static_cast<int>(std::ceil(12 * sigma)) + n;
    for (int k = -reach; k <= reach; ++k) g[static_cast<std::size_t>(wrap_index(k, n))] += std::exp(-0.5 * k * k / (sigma * sigma));
    double s = 0.0;
    for (double v : g) s += v;
    Epi out(e.n_a(), n);
    for (int a = 0; a < e.n_a(); ++a)
        for (int w = 0; w < n; ++w) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += g[static_cast<std::size_t>(k)] / s * e(a, wrap_index(w - k, n));
            out(a, w) = acc;
        }
    return out;
}

Outcome filter_contract() {
    const Epi toy = synth_epi(toy_epi_scene(63, 216, 9.0));
    double worst = 0.0;
    int checked = 0;
    for (int scale : {1, 2, 4}) {
        const Epi under = angular_undersample(spatial_downsample(toy, scale), 3);
        const SpectralPoints pts = locate_points(dft2_amplitude(under), 3, 9.0 / scale, under.n_w() / 2);
        for (double beta : {10.0, 50.0, 100.0, 300.0}) {
            const auto sigma = shape_param(pts, beta);
            if (!sigma) continue;
            const Array2 filtered = dft2_amplitude(gaussian_filter_periodic(under, *sigma));
            const double target = filtered(pts.p_a.row, pts.p_a.col) / beta;
            worst = std::max(worst, std::abs(filtered(pts.p_b.row, pts.p_b.col) / target - 1.0));
            ++checked;
        }
    }
    return {checked == 12 && worst < 0.05,
            std::to_string(checked) + " (scale, beta) cells, worst relative deviation " + fmt("%.4f", worst)};
}

// ---------------------------------------------------------------- C4
net::NetworkParams random_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    net::NetworkParams p = net::NetworkParams::zeros({}, 3);
    for (std::size_t i = 0; i < p.specs.size(); ++i) {
        const net::LayerSpec& s = p.specs[i];
        p.layers[i].weight = oracle::random_vector(rng, p.layers[i].weight.size(), 1.0 / std::sqrt(double(s.in_ch * s.k_a * s.k_w)));
        p.layers[i].bias = oracle::random_vector(rng, p.layers[i].bias.size(), 0.1);
        for (double& a : p.layers[i].slope) a = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
    }
    return p;
}

// Relative error of central differences of <f(v), r> for every entry of `v`.
template <class Obj>
double fd_error(std::vector<double>& v, const std::vector<double>& analytic, Obj objective, double h) {
    std::vector<double> fd(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double lp = objective();
        v[i] = keep - h;
        const double lm = objective();
        v[i] = keep;
        fd[i] = (lp - lm) / (2 * h);
    }
    return oracle::relative_error(fd, analytic);
}

Outcome gradient_check() {
    const auto t0 = Clock::now();
    using namespace lapepi::net;
    std::mt19937_64 rng(404);
    std::ostringstream d;
    double worst = 0.0;

    // Single layers: conv, deconv (both stride axes), PReLU.
    {
        auto w = oracle::random_vector(rng, 3 * 2 * 3 * 5), b = oracle::random_vector(rng, 3);
        Tensor4 x = oracle::random_tensor(rng, 1, 2, 5, 12);
        const Stride2 s{1, 1};
        FilterView f{3, 2, 3, 5, w, b};
        Tensor4 r = oracle::random_tensor(rng, 1, 3, 5, 12);
        const FilterGrads g = conv2d_backward(x, f, s, r);
        auto obj = [&] { return dot(conv2d(x, f, s), r); };
        const double e = std::max({fd_error(w, g.dw, obj, 1e-4), fd_error(b, g.db, obj, 1e-4), fd_error(x.values(), g.dx.values(), obj, 1e-4)});
        d << "conv " << fmt("%.1e", e) << "; ";
        worst = std::max(worst, e);
    }
    for (Stride2 s : {Stride2{1, 4}, Stride2{3, 1}}) {
        auto w = oracle::random_vector(rng, 2 * 3 * 5 * 5), b = oracle::random_vector(rng, 2);
        Tensor4 x = oracle::random_tensor(rng, 1, 3, 5, 3);
        FilterView f{2, 3, 5, 5, w, b};
        Tensor4 r = oracle::random_tensor(rng, 1, 2, s.a * 4 + 1, s.w * 2 + 1);
        const FilterGrads g = deconv2d_backward(x, f, s, r);
        auto obj = [&] { return dot(deconv2d(x, f, s), r); };
        const double e = std::max({fd_error(w, g.dw, obj, 1e-4), fd_error(b, g.db, obj, 1e-4), fd_error(x.values(), g.dx.values(), obj, 1e-4)});
        d << "deconv[" << s.a << "," << s.w << "] " << fmt("%.1e", e) << "; ";
        worst = std::max(worst, e);
    }
    {
        Tensor4 x = oracle::random_tensor(rng, 1, 3, 5, 12);
        for (double& v : x.values())
            if (std::abs(v) < 1e-2) v = 0.5;
        std::vector<double> slope{0.1, 0.25, 0.7};
        Tensor4 r = oracle::random_tensor(rng, 1, 3, 5, 12);
        const PreluGrads g = prelu_backward(x, slope, r);
        auto obj = [&] { return dot(prelu(x, slope), r); };
        const double e = std::max(fd_error(slope, g.dslope, obj, 1e-6), fd_error(x.values(), g.dx.values(), obj, 1e-6));
        d << "prelu " << fmt("%.1e", e) << "; ";
        worst = std::max(worst, e);
    }

    // Composed network on a 5x12 pyramid. Probes whose perturbation moves a
    // PReLU input across zero are redrawn.
    NetworkParams p = random_params(405);
    LapEpiPyramid pyr = build_lapepi(oracle::random_epi(rng, 5, 12), {});
    ForwardCache cache;
    const Epi out = forward(pyr, p, &cache);
    Epi r(out.n_a(), out.n_w());
    for (double& v : r.data.values()) v = std::normal_distribution<double>()(rng);
    const BackwardResult g = backward(p, cache, r);
    auto objective = [&](std::vector<std::vector<bool>>& signs) {
        ForwardCache c;
        const Epi y = forward(pyr, p, &c);
        signs.clear();
        for (std::size_t i = 0; i < p.specs.size(); ++i) {
            std::vector<bool> sg;
            if (p.specs[i].has_prelu)
                for (double v : c.layer_pre[i].values()) sg.push_back(v >= 0);
            signs.push_back(std::move(sg));
        }
        double s = 0;
        for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data.values()[i] * r.data.values()[i];
        return s;
    };
    const double h = 1e-4;
    int redrawn = 0;
    auto probe = [&](double& v, double& fd) {
        const double keep = v;
        std::vector<std::vector<bool>> sp, sm;
        v = keep + h;
        const double lp = objective(sp);
        v = keep - h;
        const double lm = objective(sm);
        v = keep;
        fd = (lp - lm) / (2 * h);
        if (sp != sm) ++redrawn;
        return sp == sm;
    };
    double net_worst = 0.0;
    for (std::size_t li = 0; li < p.specs.size(); ++li) {
        auto sample = [&](std::vector<double>& values, const std::vector<double>& analytic) {
            if (values.empty()) return;
            std::vector<double> fd, an;
            for (int k = 0, tries = 0; k < 12 && tries < 200; ++tries) {
                const std::size_t i = std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng);
                double v = 0;
                if (!probe(values[i], v)) continue;
                fd.push_back(v);
                an.push_back(analytic[i]);
                ++k;
            }
            net_worst = std::max(net_worst, fd.empty() ? 1.0 : oracle::relative_error(fd, an));
        };
        sample(p.layers[li].weight, g.params.layers[li].weight);
        sample(p.layers[li].bias, g.params.layers[li].bias);
        sample(p.layers[li].slope, g.params.layers[li].slope);
    }
    {
        std::vector<double*> xs, gs;
        LapEpiPyramid gin = g.input;
        auto collect = [](LapEpiPyramid& q, std::vector<double*>& out) {
            for (double& v : q.level1.data.values()) out.push_back(&v);
            for (ResidualLevel& l : q.residuals) {
                for (double& v : l.residual.data.values()) out.push_back(&v);
                for (double& v : l.blurred.data.values()) out.push_back(&v);
            }
        };
        collect(pyr, xs);
        collect(gin, gs);
        std::vector<double> fd, an;
        for (std::size_t i = 0; i < xs.size(); i += 2) {
            double v = 0;
            if (!probe(*xs[i], v)) continue;
            fd.push_back(v);
            an.push_back(*gs[i]);
        }
        net_worst = std::max(net_worst, fd.empty() ? 1.0 : oracle::relative_error(fd, an));
    }
    d << "network " << fmt("%.1e", net_worst) << " (" << redrawn << " kink probes redrawn); ";
    worst = std::max(worst, net_worst);
    const double sec = seconds_since(t0);
    d << fmt("%.1f", sec) << " s";
    return {worst < 1e-4 && sec < 60.0, "worst relative error " + fmt("%.2e", worst) + ": " + d.str()};
}

// ---------------------------------------------------------------- C5
Outcome shape_laws() {
    const net::NetworkParams p = train::init_params(5);
    std::mt19937_64 rng(505);
    std::ostringstream d;
    bool ok = true;
    auto expect = [&](const std::string& what, int got_a, int got_b, int want_a, int want_b) {
        const bool hit = got_a == want_a && got_b == want_b;
        ok = ok && hit;
        d << what << " -> " << got_a << "x" << got_b << (hit ? "" : " (wrong)") << "; ";
    };
    const Epi o31 = net::forward(build_lapepi(oracle::random_epi(rng, 11, 44), p.pyramid), p);
    expect("11x44 a3", o31.n_a(), o31.n_w(), 31, 44);
    ReconConfig cfg;
    cfg.alpha_a = 8;
    const Epi o193 = reconstruct_epi(oracle::random_epi(rng, 25, 32), p, cfg);
    expect("25 views a8", o193.n_a(), o193.n_w(), 193, 32);
    LightField4D lf(3, 3, 8, 12, 1, ColorSpace::LUMA);
    for (double& v : lf.samples()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    cfg.alpha_a = 3;
    const LightField4D g7 = reconstruct_lf4d(lf, p, cfg);
    expect("3x3 4d a3", g7.n_t(), g7.n_s(), 7, 7);
    cfg.alpha_a = 2;
    const LightField4D g5 = reconstruct_lf4d(lf, p, cfg);
    expect("3x3 4d a2", g5.n_t(), g5.n_s(), 5, 5);
    return {ok, d.str()};
}

// ---------------------------------------------------------------- C6
// The eight pairs: one 31x44 window from each of eight corpus-style EPIs
// (dense disparities in [0, 3]).
std::vector<train::PatchPair> overfit_pairs(const train::TrainConfig& cfg) {
    train::SampleSource src;
    src.kind = train::SampleSource::Kind::Epi;
    src.arrays = epi_corpus(606, 8, 31, 44, 0.0, 3.0);
    return train::extract_patch_pairs(src, cfg);
}

train::TrainConfig overfit_config() {
    train::TrainConfig cfg = train::TrainConfig::for_stage(train::Stage::Pretrain);
    cfg.batch = 4;
    cfg.max_steps = 5000;
    cfg.seed = 6;
    cfg.log_every = 100;
    cfg.adam.lr_conv = 1e-3;
    cfg.adam.lr_deconv = 1e-3;
    cfg.decay_every = 1000;
    cfg.decay_factor = 0.5;
    return cfg;
}

Outcome overfit_sanity() {
    const auto t0 = Clock::now();
    const train::TrainConfig cfg = overfit_config();
    const auto pairs = overfit_pairs(cfg);
    const train::TrainResult res = train::run_stage(pairs, cfg);
    const double sec = seconds_since(t0);

    // Determinism: a fresh run with the same seed reproduces the trace prefix.
    train::TrainConfig shortcfg = cfg;
    shortcfg.max_steps = 300;
    const train::TrainResult again = train::run_stage(overfit_pairs(shortcfg), shortcfg);
    bool same = !again.trace.empty();
    for (std::size_t i = 0; same && i < again.trace.size(); ++i)
        same = again.trace[i].step == res.trace[i].step && again.trace[i].loss == res.trace[i].loss;

    // Loss over all eight pairs with the final parameters.
    std::vector<std::size_t> all(pairs.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    net::Gradients unused;
    const double final_loss = train::batch_gradients(res.params, pairs, all, unused);
    const double per_pixel_mse = std::pow(final_loss, 2) / static_cast<double>(pairs[0].label.data.size());
    fs::create_directories(g_workdir);
    write_file_atomic(g_workdir / "c6_loss_trace.csv", train::loss_trace_csv(res.trace));
    std::ostringstream d;
    d << pairs.size() << " pairs, " << res.steps << " steps: full-set loss " << fmt("%.4g", final_loss)
      << " (per-pixel MSE ~" << fmt("%.3g", per_pixel_mse) << "), target < 1e-3; deterministic prefix "
      << (same ? "yes" : "NO") << "; " << fmt("%.0f", sec) << " s";
    return {pairs.size() == 8 && final_loss < 1e-3 && same && sec < 600.0, d.str()};
}

// ---------------------------------------------------------------- C7
constexpr int kC7Steps = 30000;
constexpr int kC7Batch = 4;

Outcome end_to_end() {
    const auto t0 = Clock::now();
    train::TrainConfig cfg = train::TrainConfig::for_stage(train::Stage::Pretrain);
    cfg.batch = kC7Batch;
    cfg.max_steps = kC7Steps;
    cfg.seed = 7;
    cfg.log_every = 500;
    cfg.stride_w = 20;
    cfg.adam.lr_conv = 1e-3;
    cfg.adam.lr_deconv = 1e-3;
    cfg.decay_every = 6000;
    cfg.decay_factor = 0.5;

    // Bundled corpus: dense disparities 0..3 per view step, i.e. 0..9 px
    // between the rate-3 input views.
    train::SampleSource src;
    src.kind = train::SampleSource::Kind::Epi;
    src.arrays = epi_corpus(7007, 160, 31, 64, 0.0, 3.0);
    const auto pairs = train::extract_patch_pairs(src, cfg);
    const train::TrainResult res = train::run_stage(pairs, cfg);
    fs::create_directories(g_workdir);
    train::save_checkpoint(res.params, g_workdir / "c7_model.bin");
    write_file_atomic(g_workdir / "c7_loss_trace.csv", train::loss_trace_csv(res.trace));
    const double train_sec = seconds_since(t0);

    // Held-out scene: seed outside the corpus, 7 dense views, 3 inputs.
    const LightField4D truth = synth_lightfield(random_scene(424242, 7, 1, 96, 48, 0.0, 3.0));
    LightField4D sparse(1, 3, truth.n_v(), truth.n_u(), 1, ColorSpace::LUMA);
    for (int s = 0; s < 3; ++s) sparse.set_view(0, s, 0, truth.view(0, 3 * s));
    ReconConfig rc;
    rc.alpha_a = 3;
    const LightField4D recon = reconstruct_lf3d(sparse, res.params, rc);
    const LightField4D cubic = interpolate_lf(sparse, 3, AngularInterp::Cubic);
    const auto mask = synthesized_mask(1, 7, 3);
    const EvalReport net_rep = evaluate(recon, truth, mask);
    const EvalReport cub_rep = evaluate(cubic, truth, mask);
    const double net_psnr = net_rep.mean_psnr.value_or(1e9), cub_psnr = cub_rep.mean_psnr.value_or(1e9);
    const double sec = seconds_since(t0);
    std::ostringstream d;
    d << pairs.size() << " pairs, " << res.steps << " steps (batch " << kC7Batch << ", final logged loss "
      << fmt("%.4g", res.trace.empty() ? 0.0 : res.trace.back().loss) << ", " << fmt("%.0f", train_sec)
      << " s); synthesized views: network " << fmt("%.2f", net_psnr) << " dB / SSIM " << fmt("%.4f", net_rep.mean_ssim)
      << ", bicubic " << fmt("%.2f", cub_psnr) << " dB / SSIM " << fmt("%.4f", cub_rep.mean_ssim) << ", margin "
      << fmt("%.2f", net_psnr - cub_psnr) << " dB (need >= 2, absolute > 30); " << fmt("%.0f", sec) << " s";
    return {!res.diverged && net_psnr - cub_psnr >= 2.0 && net_psnr > 30.0 && sec < 3600.0, d.str()};
}

// ---------------------------------------------------------------- C8
Outcome metric_fidelity() {
    std::mt19937_64 rng(808);
    auto image = [&](int h, int w) {
        Array2 a(h, w);
        for (double& v : a.values()) v = std::uniform_real_distribution<double>(0, 1)(rng);
        return a;
    };
    double psnr_err = 0.0, ssim_err = 0.0;
    bool self_one = true;
    for (int trial = 0; trial < 5; ++trial) {
        const Array2 a = image(20 + trial, 27), b = image(20 + trial, 27);
        // PSNR by direct per-pixel summation.
        double se = 0.0;
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) se += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
        const double ref_psnr = 10.0 * std::log10(1.0 / (se / (a.rows() * a.cols())));
        psnr_err = std::max(psnr_err, std::abs(*psnr(a, b) - ref_psnr));

        // SSIM by explicit 11x11 windows with centered moments.
        const int r = 5;
        double w[11][11], ws = 0;
        for (int i = -r; i <= r; ++i)
            for (int j = -r; j <= r; ++j) ws += w[i + r][j + r] = std::exp(-(i * i + j * j) / 4.5);
        double total = 0.0;
        for (int y = 0; y < a.rows(); ++y)
            for (int x = 0; x < a.cols(); ++x) {
                auto at = [&](const Array2& m, int i, int j) { return m(reflect_index(y + i, m.rows()), reflect_index(x + j, m.cols())); };
                double ma = 0, mb = 0;
                for (int i = -r; i <= r; ++i)
                    for (int j = -r; j <= r; ++j) ma += w[i + r][j + r] / ws * at(a, i, j), mb += w[i + r][j + r] / ws * at(b, i, j);
                double va = 0, vb = 0, cv = 0;
                for (int i = -r; i <= r; ++i)
                    for (int j = -r; j <= r; ++j) {
                        const double k = w[i + r][j + r] / ws, da = at(a, i, j) - ma, db = at(b, i, j) - mb;
                        va += k * da * da, vb += k * db * db, cv += k * da * db;
                    }
                const double c1 = 1e-4, c2 = 9e-4;
                total += (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        ssim_err = std::max(ssim_err, std::abs(ssim(a, b) - total / (a.rows() * a.cols())));
        self_one = self_one && ssim(a, a) == 1.0;
    }
    return {psnr_err <= 1e-10 && ssim_err <= 1e-10 && self_one,
            "PSNR deviation " + fmt("%.2e", psnr_err) + ", SSIM deviation " + fmt("%.2e", ssim_err) +
                ", SSIM(a,a)=1 " + (self_one ? "yes" : "no")};
}

// ---------------------------------------------------------------- C9
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    fs::create_directories(g_workdir);
    std::ostringstream d;
    // Checkpoint round trip, compared bit for bit.
    const net::NetworkParams p = train::init_params(909);
    train::save_checkpoint(p, g_workdir / "c9.bin");
    const net::NetworkParams q = train::load_checkpoint(g_workdir / "c9.bin");
    bool ckpt = q.layers.size() == p.layers.size();
    for (std::size_t i = 0; ckpt && i < p.layers.size(); ++i)
        ckpt = std::memcmp(p.layers[i].weight.data(), q.layers[i].weight.data(), p.layers[i].weight.size() * sizeof(double)) == 0 &&
               p.layers[i].bias == q.layers[i].bias && p.layers[i].slope == q.layers[i].slope;
    train::save_checkpoint(q, g_workdir / "c9_again.bin");
    ckpt = ckpt && slurp(g_workdir / "c9.bin") == slurp(g_workdir / "c9_again.bin");
    d << "checkpoint round trip " << (ckpt ? "bit-exact" : "DIFFERS") << "; ";

    // Two training runs with the same seed.
    train::TrainConfig cfg = train::TrainConfig::for_stage(train::Stage::Pretrain);
    cfg.batch = 2;
    cfg.max_steps = 40;
    cfg.log_every = 5;
    cfg.seed = 99;
    train::SampleSource src;
    src.kind = train::SampleSource::Kind::NaturalImage;
    src.arrays = natural_corpus(990, 3, 45, 64);
    std::string traces[2];
    for (std::string& t : traces) t = train::loss_trace_csv(train::run_stage(train::extract_patch_pairs(src, cfg), cfg).trace);
    const bool trace_same = traces[0] == traces[1];
    d << "loss traces " << (trace_same ? "identical" : "DIFFER") << "; ";

    // CSV outputs.
    const Epi toy = synth_epi(toy_epi_scene(63, 216, 9.0));
    const std::string a1 = sweep(toy, {1, 2, 4}, {10, 100, 300}, 3, 9.0).to_csv();
    const std::string a2 = sweep(toy, {1, 2, 4}, {10, 100, 300}, 3, 9.0).to_csv();
    const LightField4D truth = synth_lightfield(random_scene(77, 7, 1, 32, 16, 0.0, 2.0));
    LightField4D sparse(1, 3, 16, 32, 1, ColorSpace::LUMA);
    for (int s = 0; s < 3; ++s) sparse.set_view(0, s, 0, truth.view(0, 3 * s));
    std::string e[2];
    for (std::string& x : e) {
        const LightField4D rec = reconstruct_lf3d(sparse, q, {});
        x = evaluate(rec, truth, synthesized_mask(1, 7, 3)).to_csv();
    }
    const bool csv_same = a1 == a2 && e[0] == e[1];
    d << "alias/eval CSVs " << (csv_same ? "byte-identical" : "DIFFER");
    return {ckpt && trace_same && csv_same, d.str()};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> all{
        {1, "pyramid exactness", pyramid_exactness},
        {2, "Fourier-analysis trend", fourier_trend},
        {3, "filter-design contract", filter_contract},
        {4, "gradient correctness", gradient_check},
        {5, "shape laws", shape_laws},
        {6, "overfit sanity", overfit_sanity},
        {7, "end-to-end desk-scale quality", end_to_end},
        {8, "metric fidelity", metric_fidelity},
        {9, "determinism and persistence", determinism},
    };
    std::vector<int> selected;
    g_workdir = fs::temp_directory_path() / "lapepi_acceptance";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            selected.push_back(std::atoi(argv[++i]));
        } else if (a == "--workdir" && i + 1 < argc) {
            g_workdir = argv[++i];
        } else {
            std::cerr << "usage: lapepi_acceptance [--criterion N]... [--workdir DIR]\n";
            return 2;
        }
    }
    int failed = 0;
    for (const Criterion& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::ostringstream line;
        line << "[PRIMARY] C" << c.id << " " << c.name << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")\n";
        std::cout << line.str() << std::flush;
        // ctest hides the output of passing tests; keep every line on disk too.
        fs::create_directories(g_workdir);
        write_file_atomic(g_workdir / ("c" + std::to_string(c.id) + "_result.txt"), line.str());
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
