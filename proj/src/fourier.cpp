// SPDX-License-Identifier: Apache-2.0
#include "lapepi/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "lapepi/pyramid.hpp"

namespace lapepi {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* ptr;
};

}  // namespace

Array2 dft2_amplitude(const Epi& epi, bool hann) {
    const int rows = epi.n_a();
    const int cols = epi.n_w();
    if (rows < 2 || cols < 2) throw ShapeError("dft2_amplitude: EPI must be at least 2x2");
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    FftwBuffer in(n), out(n);
    std::vector<double> window(static_cast<std::size_t>(cols), 1.0);
    if (hann)
        for (int w = 0; w < cols; ++w) window[static_cast<std::size_t>(w)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * w / cols);
    for (int a = 0; a < rows; ++a)
        for (int w = 0; w < cols; ++w) {
            const std::size_t i = static_cast<std::size_t>(a) * cols + w;
            in.ptr[i][0] = epi(a, w) * window[static_cast<std::size_t>(w)];
            in.ptr[i][1] = 0.0;
        }
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(rows, cols, in.ptr, out.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    Array2 amp(rows, cols);
    for (int a = 0; a < rows; ++a)
        for (int w = 0; w < cols; ++w) {
            const std::size_t i = static_cast<std::size_t>(a) * cols + w;
            amp((a + rows / 2) % rows, (w + cols / 2) % cols) = std::hypot(out.ptr[i][0], out.ptr[i][1]);
        }
    return amp;
}

Epi angular_undersample(const Epi& epi, int rate) {
    if (rate < 1) throw Error("angular_undersample: rate must be >= 1");
    Epi out = epi;
    for (int a = 0; a < out.n_a(); ++a)
        if (a % rate != 0) std::ranges::fill(out.data.row(a), 0.0);
    return out;
}

SpectralPoints locate_points(const Array2& spectrum, int angular_rate, double d_max, int c_u) {
    if (angular_rate < 1) throw Error("locate_points: angular_rate must be >= 1");
    if (!(d_max > 0.0)) throw Error("locate_points: d_max must be positive");
    const int rows = spectrum.rows();
    const int cols = spectrum.cols();
    const int cr = rows / 2;
    const int cc = cols / 2;

    const double seed_freq = 1.0 / (angular_rate * d_max);
    if (seed_freq >= 0.5)
        throw NoAliasing("no aliasing: replica crossing " + std::to_string(seed_freq) +
                         " cycles/sample lies beyond Nyquist; sigma undefined");
    const int seed_col = cc + static_cast<int>(std::lround(seed_freq * cols));

    SpectralPoints pts;
    pts.c_u = c_u;
    pts.p_a = {cr, cc, 0.0, 0.0};
    pts.amp_a = spectrum(cr, cc);

    double best = -1.0;
    for (int r = std::max(0, cr - 2); r <= std::min(rows - 1, cr + 2); ++r)
        for (int c = std::max(cc + 1, seed_col - 2); c <= std::min(cols - 1, seed_col + 2); ++c)
            if (spectrum(r, c) > best) {
                best = spectrum(r, c);
                pts.p_b = {r, c, static_cast<double>(r - cr) / rows, static_cast<double>(c - cc) / cols};
            }
    if (best < 0.0) throw NoAliasing("no aliasing: replica band is empty");
    pts.amp_b = best;
    if (!(pts.amp_a > 0.0) || !(pts.amp_b > 0.0)) throw NoAliasing("no aliasing: zero spectral amplitude");
    return pts;
}

std::optional<double> shape_param(const SpectralPoints& points, double beta) {
    if (beta < 10.0 || beta > 300.0) throw Error("shape_param: beta must lie in [10, 300]");
    const double ratio = points.amp_a / (beta * points.amp_b);
    const double omega = points.p_b.omega_u;
    if (!(ratio < 1.0) || omega == 0.0) return std::nullopt;
    return std::sqrt(-std::log(ratio) / (2.0 * std::numbers::pi * std::numbers::pi * omega * omega));
}

double gaussian_response(double sigma, double omega) {
    return std::exp(-2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma * omega * omega);
}

int kernel_size_px(double sigma, int c_u) {
    if (sigma < 0.0) throw Error("kernel_size_px: sigma must be >= 0");
    if (c_u < 1) throw Error("kernel_size_px: c_u must be >= 1");
    const long n = std::lround(16.0 * sigma * c_u);
    return static_cast<int>(n % 2 == 0 ? n + 1 : n);
}

AliasReport sweep(const Epi& epi, const std::vector<int>& scales, const std::vector<double>& betas, int angular_rate,
                  double d_max, bool hann) {
    AliasReport report;
    report.hann_window = hann;
    for (int scale : scales) {
        if (!is_power_of(scale, 2)) throw Error("sweep: scales must be powers of two");
        const Epi down = spatial_downsample(epi, scale, 2);
        const Epi under = angular_undersample(down, angular_rate);
        const Array2 spectrum = dft2_amplitude(under, hann);
        const int c_u = down.n_w() / 2;
        const SpectralPoints pts = locate_points(spectrum, angular_rate, d_max / scale, c_u);
        for (double beta : betas) {
            const double sigma = shape_param(pts, beta).value_or(0.0);
            report.rows.push_back({scale, beta, sigma, kernel_size_px(sigma, c_u)});
        }
    }
    return report;
}

std::string AliasReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "scale,beta,sigma,kernel_size\n";
    for (const AliasRow& r : rows) out << r.scale << ',' << r.beta << ',' << r.sigma << ',' << r.kernel_size << '\n';
    return out.str();
}

}  // namespace lapepi
