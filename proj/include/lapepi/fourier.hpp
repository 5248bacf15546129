// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lapepi/lightfield.hpp"

namespace lapepi {

/// Raised when the requested geometry produces no spectral replica inside the
/// Nyquist band, so no anti-aliasing pre-filter is defined.
class NoAliasing : public Error {
public:
    using Error::Error;
};

/// A bin of a centered spectrum. Frequencies are normalized to cycles/sample,
/// measured from the center bin.
struct SpectralBin {
    int row = 0;
    int col = 0;
    double omega_s = 0.0;
    double omega_u = 0.0;
};

struct SpectralPoints {
    SpectralBin p_a;  // spectrum center
    SpectralBin p_b;  // lowest-frequency aliased sample
    double amp_a = 0.0;
    double amp_b = 0.0;
    int c_u = 0;      // spatial half-width in pixels
};

struct AliasRow {
    int scale = 1;
    double beta = 0.0;
    double sigma = 0.0;
    int kernel_size = 1;
};

struct AliasReport {
    std::vector<AliasRow> rows;
    bool hann_window = false;

    /// "scale,beta,sigma,kernel_size" with 12 significant digits.
    std::string to_csv() const;
};

/// Magnitude of the 2-D DFT with zero frequency moved to (n_a/2, n_w/2).
/// With `hann` the spatial axis is weighted by a periodic Hann window first.
Array2 dft2_amplitude(const Epi& epi, bool hann = false);

/// Zero-fills every row whose index is not a multiple of `rate`: the
/// angularly undersampled EPI kept on the dense grid, so spectral copies
/// appear at angular offsets of 1/rate.
Epi angular_undersample(const Epi& epi, int rate);

/// P_a is the spectrum center. P_b is seeded where the first replica line
/// (angular period 1/angular_rate, slope d_max) crosses the Omega_u axis,
/// Omega_u = 1 / (angular_rate * d_max), then refined to the strongest bin in a
/// +-2 bin window (the center column excluded).
/// Throws NoAliasing when the seed lies at or beyond Nyquist.
SpectralPoints locate_points(const Array2& spectrum, int angular_rate, double d_max, int c_u);

/// sigma = sqrt(-ln(amp_a / (beta * amp_b)) / (2 pi^2 Omega_u(P_b)^2)).
/// Returns nullopt when the radicand is not positive (no pre-filter needed
/// at this beta). beta must lie in [10, 300].
std::optional<double> shape_param(const SpectralPoints& points, double beta);

/// Frequency response of the unit-DC Gaussian at normalized frequency omega.
double gaussian_response(double sigma, double omega);

/// round(16 * sigma * c_u), bumped to the next odd integer; sigma == 0 gives 1.
int kernel_size_px(double sigma, int c_u);

/// For each scale: spatially downsample, undersample angularly, locate the
/// spectral points and evaluate sigma / kernel size for every beta.
/// Scales must be powers of two; d_max is the disparity at scale 1.
AliasReport sweep(const Epi& epi, const std::vector<int>& scales, const std::vector<double>& betas, int angular_rate,
                  double d_max, bool hann = false);

}  // namespace lapepi
