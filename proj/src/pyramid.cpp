// SPDX-License-Identifier: Apache-2.0
#include "lapepi/pyramid.hpp"

#include <cmath>
#include <string>

namespace lapepi {

int PyramidConfig::total_factor() const { return int_pow(alpha_s, levels - 1); }

int PyramidConfig::kernel_size(int level) const {
    if (level < 2 || level > levels) throw Error("kernel_size: level out of range");
    return level_kernel_sizes.at(static_cast<std::size_t>(level - 2));
}

void PyramidConfig::validate() const {
    if (levels < 2) throw Error("pyramid needs at least 2 levels");
    if (alpha_s < 2) throw Error("alpha_s must be >= 2");
    if (static_cast<int>(level_kernel_sizes.size()) != levels - 1)
        throw Error("need one pre-filter size per residual level (" + std::to_string(levels - 1) + ")");
    for (std::size_t i = 0; i < level_kernel_sizes.size(); ++i) {
        const int k = level_kernel_sizes[i];
        if (k < 3 || k % 2 == 0) throw Error("pre-filter sizes must be odd and >= 3");
        if (i > 0 && k < level_kernel_sizes[i - 1]) throw Error("pre-filter sizes must be nondecreasing");
    }
}

double kernel_sigma_px(int size) { return (size - 1) / 8.0; }

std::vector<double> gaussian_kernel_1d(int size) {
    if (size < 1 || size % 2 == 0) throw Error("gaussian_kernel_1d: size must be odd and >= 1");
    if (size == 1) return {1.0};
    const double sigma = kernel_sigma_px(size);
    const int half = size / 2;
    std::vector<double> k(static_cast<std::size_t>(size));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) sum += (k[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * i * i / (sigma * sigma)));
    for (double& x : k) x /= sum;
    return k;
}

Epi convolve_spatial(const Epi& epi, std::span<const double> kernel) {
    if (kernel.size() % 2 == 0) throw Error("convolve_spatial: kernel length must be odd");
    const int half = static_cast<int>(kernel.size()) / 2;
    const int n = epi.n_w();
    Epi out(epi.n_a(), n, 0.0, epi.axis);
    for (int a = 0; a < epi.n_a(); ++a) {
        auto src = epi.data.row(a);
        auto dst = out.data.row(a);
        for (int w = 0; w < n; ++w) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) acc += kernel[static_cast<std::size_t>(k + half)] * src[static_cast<std::size_t>(reflect_index(w + k, n))];
            dst[static_cast<std::size_t>(w)] = acc;
        }
    }
    return out;
}

Epi spatial_downsample(const Epi& epi, int factor, int alpha_s) {
    if (factor == 1) return epi;
    if (!is_power_of(factor, alpha_s))
        throw Error("spatial_downsample: factor " + std::to_string(factor) + " is not a power of " + std::to_string(alpha_s));
    if (epi.n_w() % factor != 0)
        throw Error("spatial_downsample: width " + std::to_string(epi.n_w()) + " is not divisible by " +
                    std::to_string(factor) + " (pad first)");
    static const std::vector<double> octave_kernel = gaussian_kernel_1d(5);
    Epi cur = epi;
    for (int f = factor; f > 1; f /= alpha_s) {
        const Epi blurred = convolve_spatial(cur, octave_kernel);
        Epi next(cur.n_a(), cur.n_w() / alpha_s, 0.0, cur.axis);
        for (int a = 0; a < cur.n_a(); ++a)
            for (int w = 0; w < next.n_w(); ++w) next(a, w) = blurred(a, w * alpha_s);
        cur = std::move(next);
    }
    return cur;
}

Epi spatial_upsample(const Epi& epi, int factor) {
    if (factor < 1) throw Error("spatial_upsample: factor must be >= 1");
    if (factor == 1) return epi;
    const int n = epi.n_w();
    Epi out(epi.n_a(), n * factor, 0.0, epi.axis);
    for (int j = 0; j < out.n_w(); ++j) {
        const int i0 = j / factor;
        const int rem = j % factor;
        if (i0 >= n - 1) {
            for (int a = 0; a < epi.n_a(); ++a) out(a, j) = epi(a, n - 1);
            continue;
        }
        const double t = static_cast<double>(rem) / factor;
        for (int a = 0; a < epi.n_a(); ++a) out(a, j) = rem == 0 ? epi(a, i0) : (1.0 - t) * epi(a, i0) + t * epi(a, i0 + 1);
    }
    return out;
}

Epi pad_spatial_reflect(const Epi& epi, int multiple, SpatialPadding* padding) {
    if (multiple < 1) throw Error("pad_spatial_reflect: multiple must be >= 1");
    const int n = epi.n_w();
    const int total = (multiple - n % multiple) % multiple;
    const SpatialPadding pad{total / 2, total - total / 2};
    if (padding) *padding = pad;
    if (total == 0) return epi;
    Epi out(epi.n_a(), n + total, 0.0, epi.axis);
    for (int a = 0; a < epi.n_a(); ++a)
        for (int w = 0; w < out.n_w(); ++w) out(a, w) = epi(a, reflect_index(w - pad.left, n));
    return out;
}

Epi crop_spatial(const Epi& epi, SpatialPadding padding) {
    const int n = epi.n_w() - padding.left - padding.right;
    if (n < 1) throw ShapeError("crop_spatial: padding exceeds width");
    Epi out(epi.n_a(), n, 0.0, epi.axis);
    for (int a = 0; a < epi.n_a(); ++a)
        for (int w = 0; w < n; ++w) out(a, w) = epi(a, w + padding.left);
    return out;
}

namespace {

Epi subtract(const Epi& a, const Epi& b) {
    Epi out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data.data()[i] -= b.data.data()[i];
    return out;
}

void add_in_place(Epi& a, const Epi& b) {
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data.data()[i] += b.data.data()[i];
}

}  // namespace

LapEpiPyramid build_lapepi(const Epi& epi, const PyramidConfig& cfg) {
    cfg.validate();
    if (epi.n_w() % cfg.total_factor() != 0)
        throw Error("build_lapepi: width " + std::to_string(epi.n_w()) + " must be padded to a multiple of " +
                    std::to_string(cfg.total_factor()));
    // gaussian[p - 1] = G^p = epi downsampled by alpha_s^(P - p); built coarse-from-fine.
    std::vector<Epi> gaussian(static_cast<std::size_t>(cfg.levels));
    gaussian.back() = epi;
    for (int p = cfg.levels - 1; p >= 1; --p)
        gaussian[static_cast<std::size_t>(p - 1)] = spatial_downsample(gaussian[static_cast<std::size_t>(p)], cfg.alpha_s, cfg.alpha_s);

    LapEpiPyramid pyr;
    pyr.config = cfg;
    pyr.level1 = gaussian.front();
    for (int p = 2; p <= cfg.levels; ++p) {
        const Epi& fine = gaussian[static_cast<std::size_t>(p - 1)];
        const Epi up = spatial_upsample(gaussian[static_cast<std::size_t>(p - 2)], cfg.alpha_s);
        ResidualLevel level;
        level.residual = subtract(fine, up);
        level.blurred = convolve_spatial(level.residual, gaussian_kernel_1d(cfg.kernel_size(p)));
        pyr.residuals.push_back(std::move(level));
    }
    return pyr;
}

Epi collapse(const LapEpiPyramid& pyr) {
    Epi cur = pyr.level1;
    for (const ResidualLevel& level : pyr.residuals) {
        cur = spatial_upsample(cur, pyr.config.alpha_s);
        if (!cur.data.same_shape(level.residual.data)) throw ShapeError("collapse: residual level has wrong shape");
        add_in_place(cur, level.residual);
    }
    return cur;
}

}  // namespace lapepi
