// SPDX-License-Identifier: Apache-2.0
#include "lapepi/metrics.hpp"

#include <cmath>
#include <sstream>

#include "lapepi/pyramid.hpp"

namespace lapepi {

std::optional<double> psnr(const Array2& a, const Array2& b, double peak) {
    if (!a.same_shape(b)) throw ShapeError("psnr: image shapes differ");
    if (a.size() == 0) throw ShapeError("psnr: empty image");
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        se += d * d;
    }
    if (se == 0.0) return std::nullopt;
    const double mse = se / static_cast<double>(a.size());
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

// Separable mirrored Gaussian filtering of every pixel.
Array2 blur(const Array2& x, const std::vector<double>& k) {
    const int r = static_cast<int>(k.size()) / 2;
    Array2 tmp(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            double s = 0.0;
            for (int d = -r; d <= r; ++d) s += k[static_cast<std::size_t>(d + r)] * x(i, reflect_index(j + d, x.cols()));
            tmp(i, j) = s;
        }
    Array2 out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            double s = 0.0;
            for (int d = -r; d <= r; ++d) s += k[static_cast<std::size_t>(d + r)] * tmp(reflect_index(i + d, x.rows()), j);
            out(i, j) = s;
        }
    return out;
}

}  // namespace

double ssim(const Array2& a, const Array2& b, const SsimParams& p) {
    if (!a.same_shape(b)) throw ShapeError("ssim: image shapes differ");
    if (p.window < 1 || p.window % 2 == 0) throw Error("ssim: window must be odd");
    if (a.rows() < p.window || a.cols() < p.window)
        throw ShapeError("ssim: image is smaller than the " + std::to_string(p.window) + "x" + std::to_string(p.window) + " window");
    std::vector<double> k(static_cast<std::size_t>(p.window));
    double sum = 0.0;
    for (int i = 0; i < p.window; ++i) {
        const double x = i - p.window / 2;
        sum += k[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * p.sigma * p.sigma));
    }
    for (double& v : k) v /= sum;

    Array2 aa(a.rows(), a.cols()), bb(a.rows(), a.cols()), ab(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa.data()[i] = a.data()[i] * a.data()[i];
        bb.data()[i] = b.data()[i] * b.data()[i];
        ab.data()[i] = a.data()[i] * b.data()[i];
    }
    const Array2 mu_a = blur(a, k), mu_b = blur(b, k);
    const Array2 e_aa = blur(aa, k), e_bb = blur(bb, k), e_ab = blur(ab, k);
    const double c1 = (p.k1 * p.peak) * (p.k1 * p.peak);
    const double c2 = (p.k2 * p.peak) * (p.k2 * p.peak);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ma = mu_a.data()[i], mb = mu_b.data()[i];
        const double va = e_aa.data()[i] - ma * ma;
        const double vb = e_bb.data()[i] - mb * mb;
        const double cov = e_ab.data()[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(a.size());
}

std::vector<bool> synthesized_mask(int n_t, int n_s, int rate) {
    if (rate < 1) throw Error("synthesized_mask: rate must be >= 1");
    std::vector<bool> m(static_cast<std::size_t>(n_t) * n_s);
    for (int t = 0; t < n_t; ++t)
        for (int s = 0; s < n_s; ++s) {
            const bool on_t = n_t == 1 || t % rate == 0;
            m[static_cast<std::size_t>(t) * n_s + s] = !(on_t && s % rate == 0);
        }
    return m;
}

EvalReport evaluate(const LightField4D& recon, const LightField4D& truth, const std::vector<bool>& mask) {
    if (recon.n_t() != truth.n_t() || recon.n_s() != truth.n_s() || recon.n_v() != truth.n_v() || recon.n_u() != truth.n_u())
        throw ShapeError("evaluate: light-field geometries differ");
    if (!mask.empty() && mask.size() != static_cast<std::size_t>(recon.n_t()) * recon.n_s())
        throw ShapeError("evaluate: mask size does not match the view grid");
    const LightField4D ya = to_luma(recon), yb = to_luma(truth);
    EvalReport rep;
    double psnr_sum = 0.0, ssim_sum = 0.0;
    int finite = 0;
    for (int t = 0; t < recon.n_t(); ++t)
        for (int s = 0; s < recon.n_s(); ++s) {
            if (!mask.empty() && !mask[static_cast<std::size_t>(t) * recon.n_s() + s]) continue;
            ViewMetric m{t, s, psnr(ya.view(t, s), yb.view(t, s)), ssim(ya.view(t, s), yb.view(t, s))};
            if (m.psnr_db) {
                psnr_sum += *m.psnr_db;
                ++finite;
            } else {
                ++rep.identical;
            }
            ssim_sum += m.ssim;
            rep.views.push_back(m);
        }
    if (rep.views.empty()) throw Error("evaluate: the mask selects no views");
    if (finite > 0) rep.mean_psnr = psnr_sum / finite;
    rep.mean_ssim = ssim_sum / static_cast<double>(rep.views.size());
    return rep;
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "view_t,view_s,psnr,ssim\n";
    for (const ViewMetric& v : views) {
        os << v.t << "," << v.s << ",";
        if (v.psnr_db)
            os << *v.psnr_db;
        else
            os << "identical";
        os << "," << v.ssim << "\n";
    }
    return os.str();
}

std::string EvalReport::summary() const {
    std::ostringstream os;
    os.precision(12);
    os << "views=" << views.size() << " mean_psnr=";
    if (mean_psnr)
        os << *mean_psnr;
    else
        os << "identical";
    os << " mean_ssim=" << mean_ssim << " identical=" << identical;
    if (!scene.empty()) os << " scene=" << scene;
    if (alpha_a > 0) os << " alpha_a=" << alpha_a;
    if (!checkpoint.empty()) os << " checkpoint=" << checkpoint;
    return os.str();
}

}  // namespace lapepi
