// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "lapepi/lightfield.hpp"

namespace lapepi {

struct PyramidConfig {
    int levels = 3;                            // P
    int alpha_s = 2;                           // spatial scale gap between neighbouring levels
    std::vector<int> level_kernel_sizes{5, 13};  // pre-filter sizes for levels 2..P

    /// alpha_s^(P-1): the spatial width of any input must be a multiple of this.
    int total_factor() const;
    /// Kernel size used for pyramid level p (2 <= p <= P).
    int kernel_size(int level) const;
    void validate() const;
};

struct ResidualLevel {
    Epi residual;
    Epi blurred;
};

/// Level 1 is the input at spatial scale 1/alpha_s^(P-1); residuals[i] holds
/// level p = i + 2 at scale 1/alpha_s^(P-p). All levels keep the input's
/// angular size.
struct LapEpiPyramid {
    Epi level1;
    std::vector<ResidualLevel> residuals;
    PyramidConfig config;

    int n_a() const { return level1.n_a(); }
    /// Spatial width of the full-resolution level.
    int width() const { return residuals.empty() ? level1.n_w() : residuals.back().residual.n_w(); }
};

/// Odd-sized normalized Gaussian with sigma = (size - 1) / 8, i.e. the half
/// width spans four standard deviations.
std::vector<double> gaussian_kernel_1d(int size);
double kernel_sigma_px(int size);

/// Convolves every row with `kernel` (odd length) using mirror padding.
Epi convolve_spatial(const Epi& epi, std::span<const double> kernel);

/// Octave-by-octave: blur with the 5-tap Gaussian, keep every alpha_s-th column.
Epi spatial_downsample(const Epi& epi, int factor, int alpha_s = 2);
/// Linear interpolation along the spatial axis; output column j samples input
/// position j / factor, clamped to the last column.
Epi spatial_upsample(const Epi& epi, int factor);

struct SpatialPadding {
    int left = 0;
    int right = 0;
};

/// Mirror-pads columns so the width becomes a multiple of `multiple`; the
/// padding is split as evenly as possible with the extra column on the right.
Epi pad_spatial_reflect(const Epi& epi, int multiple, SpatialPadding* padding = nullptr);
Epi crop_spatial(const Epi& epi, SpatialPadding padding);

LapEpiPyramid build_lapepi(const Epi& epi, const PyramidConfig& cfg);

/// Inverse of build_lapepi using the unblurred residuals.
Epi collapse(const LapEpiPyramid& pyr);

}  // namespace lapepi
