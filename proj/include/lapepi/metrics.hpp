// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lapepi/lightfield.hpp"

namespace lapepi {

/// 10 log10(peak^2 / MSE); nullopt when the images are identical.
std::optional<double> psnr(const Array2& a, const Array2& b, double peak = 1.0);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 1.0;
};

/// Mean local SSIM over every pixel, Gaussian window with mirrored borders.
double ssim(const Array2& a, const Array2& b, const SsimParams& p = {});

struct ViewMetric {
    int t = 0;
    int s = 0;
    std::optional<double> psnr_db;  // nullopt: identical
    double ssim = 1.0;
};

struct EvalReport {
    std::string scene;
    int alpha_a = 0;
    std::string checkpoint;
    std::vector<ViewMetric> views;
    std::optional<double> mean_psnr;  // over views with a finite PSNR
    double mean_ssim = 1.0;
    int identical = 0;

    std::string to_csv() const;
    std::string summary() const;
};

/// Output positions not on the input lattice (t-major, n_t x n_s).
std::vector<bool> synthesized_mask(int n_t, int n_s, int rate);

/// Y-channel metrics for every masked view; an empty mask selects all views.
EvalReport evaluate(const LightField4D& recon, const LightField4D& truth, const std::vector<bool>& mask = {});

}  // namespace lapepi
