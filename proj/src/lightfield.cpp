// SPDX-License-Identifier: Apache-2.0
#include "lapepi/lightfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lapepi {

double max_abs_diff(const Array2& a, const Array2& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

std::string_view to_string(ColorSpace cs) {
    switch (cs) {
        case ColorSpace::RGB: return "RGB";
        case ColorSpace::YCBCR: return "YCBCR";
        case ColorSpace::LUMA: return "LUMA";
    }
    return "?";
}

ColorSpace parse_colorspace(std::string_view s) {
    if (s == "RGB" || s == "rgb") return ColorSpace::RGB;
    if (s == "YCBCR" || s == "ycbcr") return ColorSpace::YCBCR;
    if (s == "LUMA" || s == "luma" || s == "Y") return ColorSpace::LUMA;
    throw Error("unknown colorspace '" + std::string(s) + "'");
}

LightField4D::LightField4D(int n_t, int n_s, int n_v, int n_u, int channels, ColorSpace cs)
    : n_t_(n_t), n_s_(n_s), n_v_(n_v), n_u_(n_u), channels_(channels), colorspace_(cs) {
    if (n_t < 1 || n_s < 1 || n_v < 1 || n_u < 1) throw ShapeError("light field extents must be >= 1");
    if (channels != 1 && channels != 3) throw ShapeError("light field must have 1 or 3 channels");
    if ((cs == ColorSpace::LUMA) != (channels == 1)) throw ShapeError("colorspace does not match channel count");
    samples_.assign(static_cast<std::size_t>(channels) * n_t * n_s * n_v * n_u, 0.0);
}

Array2 LightField4D::view(int t, int s, int c) const {
    Array2 img(n_v_, n_u_);
    std::copy_n(samples_.begin() + static_cast<std::ptrdiff_t>(index(t, s, 0, 0, c)), img.size(), img.data());
    return img;
}

void LightField4D::set_view(int t, int s, int c, const Array2& img) {
    if (img.rows() != n_v_ || img.cols() != n_u_) throw ShapeError("set_view: image size does not match light field");
    std::copy_n(img.data(), img.size(), samples_.begin() + static_cast<std::ptrdiff_t>(index(t, s, 0, 0, c)));
}

void LightField4D::clamp01() {
    for (double& x : samples_) x = std::clamp(x, 0.0, 1.0);
}

namespace {

void require_colorspace(const LightField4D& lf, ColorSpace cs, const char* op) {
    if (lf.colorspace() != cs)
        throw Error(std::string(op) + ": expected " + std::string(to_string(cs)) + " input, got " +
                    std::string(to_string(lf.colorspace())));
}

}  // namespace

LightField4D rgb_to_ycbcr(const LightField4D& lf) {
    require_colorspace(lf, ColorSpace::RGB, "rgb_to_ycbcr");
    LightField4D out(lf.n_t(), lf.n_s(), lf.n_v(), lf.n_u(), 3, ColorSpace::YCBCR);
    const std::size_t plane = lf.samples().size() / 3;
    const double* src = lf.samples().data();
    double* dst = out.samples().data();
    for (std::size_t i = 0; i < plane; ++i) {
        const double r = src[i], g = src[plane + i], b = src[2 * plane + i];
        dst[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        dst[plane + i] = 0.5 + (b - dst[i]) / 1.772;
        dst[2 * plane + i] = 0.5 + (r - dst[i]) / 1.402;
    }
    return out;
}

LightField4D ycbcr_to_rgb(const LightField4D& lf) {
    require_colorspace(lf, ColorSpace::YCBCR, "ycbcr_to_rgb");
    LightField4D out(lf.n_t(), lf.n_s(), lf.n_v(), lf.n_u(), 3, ColorSpace::RGB);
    const std::size_t plane = lf.samples().size() / 3;
    const double* src = lf.samples().data();
    double* dst = out.samples().data();
    for (std::size_t i = 0; i < plane; ++i) {
        const double y = src[i], cb = src[plane + i] - 0.5, cr = src[2 * plane + i] - 0.5;
        const double r = y + 1.402 * cr;
        const double b = y + 1.772 * cb;
        // Inverts the luma row exactly: g = (y - 0.299 r - 0.114 b) / 0.587.
        const double g = (y - 0.299 * r - 0.114 * b) / 0.587;
        dst[i] = r;
        dst[plane + i] = g;
        dst[2 * plane + i] = b;
    }
    return out;
}

LightField4D to_luma(const LightField4D& lf) {
    switch (lf.colorspace()) {
        case ColorSpace::LUMA: return lf;
        case ColorSpace::RGB: return to_luma(rgb_to_ycbcr(lf));
        case ColorSpace::YCBCR: {
            LightField4D out(lf.n_t(), lf.n_s(), lf.n_v(), lf.n_u(), 1, ColorSpace::LUMA);
            std::copy_n(lf.samples().begin(), out.samples().size(), out.samples().begin());
            return out;
        }
    }
    return lf;
}

namespace {

void check_epi_coords(const LightField4D& lf, EpiAxis axis, int fixed_spatial, int fixed_angular, int channel) {
    const bool us = axis == EpiAxis::US;
    const int n_spatial = us ? lf.n_v() : lf.n_u();
    const int n_angular = us ? lf.n_t() : lf.n_s();
    if (fixed_spatial < 0 || fixed_spatial >= n_spatial || fixed_angular < 0 || fixed_angular >= n_angular ||
        channel < 0 || channel >= lf.channels())
        throw ShapeError("EPI index out of range");
}

}  // namespace

Epi extract_epi(const LightField4D& lf, EpiAxis axis, int fixed_spatial, int fixed_angular, int channel) {
    check_epi_coords(lf, axis, fixed_spatial, fixed_angular, channel);
    if (axis == EpiAxis::US) {
        Epi epi(lf.n_s(), lf.n_u(), 0.0, axis);
        for (int s = 0; s < lf.n_s(); ++s)
            for (int u = 0; u < lf.n_u(); ++u) epi(s, u) = lf.at(fixed_angular, s, fixed_spatial, u, channel);
        return epi;
    }
    Epi epi(lf.n_t(), lf.n_v(), 0.0, axis);
    for (int t = 0; t < lf.n_t(); ++t)
        for (int v = 0; v < lf.n_v(); ++v) epi(t, v) = lf.at(t, fixed_angular, v, fixed_spatial, channel);
    return epi;
}

void insert_epi(LightField4D& lf, const Epi& epi, EpiAxis axis, int fixed_spatial, int fixed_angular, int channel) {
    check_epi_coords(lf, axis, fixed_spatial, fixed_angular, channel);
    if (axis == EpiAxis::US) {
        if (epi.n_a() != lf.n_s() || epi.n_w() != lf.n_u())
            throw ShapeError("insert_epi: EPI is " + std::to_string(epi.n_a()) + "x" + std::to_string(epi.n_w()) +
                             ", slice is " + std::to_string(lf.n_s()) + "x" + std::to_string(lf.n_u()));
        for (int s = 0; s < lf.n_s(); ++s)
            for (int u = 0; u < lf.n_u(); ++u) lf.at(fixed_angular, s, fixed_spatial, u, channel) = epi(s, u);
        return;
    }
    if (epi.n_a() != lf.n_t() || epi.n_w() != lf.n_v())
        throw ShapeError("insert_epi: EPI is " + std::to_string(epi.n_a()) + "x" + std::to_string(epi.n_w()) +
                         ", slice is " + std::to_string(lf.n_t()) + "x" + std::to_string(lf.n_v()));
    for (int t = 0; t < lf.n_t(); ++t)
        for (int v = 0; v < lf.n_v(); ++v) lf.at(t, fixed_angular, v, fixed_spatial, channel) = epi(t, v);
}

Epi angular_decimate(const Epi& epi, int rate) {
    if (rate < 1) throw Error("angular_decimate: rate must be >= 1");
    if ((epi.n_a() - 1) % rate != 0)
        throw Error("angular_decimate: (n_a - 1) = " + std::to_string(epi.n_a() - 1) + " is not divisible by rate " +
                    std::to_string(rate));
    const int n_out = (epi.n_a() - 1) / rate + 1;
    Epi out(n_out, epi.n_w(), 0.0, epi.axis);
    for (int i = 0; i < n_out; ++i) std::ranges::copy(epi.data.row(i * rate), out.data.row(i).begin());
    return out;
}

}  // namespace lapepi
