// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "lapepi/common.hpp"

namespace lapepi {

enum class ColorSpace { RGB, YCBCR, LUMA };

std::string_view to_string(ColorSpace cs);
ColorSpace parse_colorspace(std::string_view s);

/// Which light-field slice an EPI was taken from.
///   US: E_{v*,t*}(u, s): rows are views along s, columns pixels along u.
///   VT: E_{u*,s*}(v, t): rows are views along t, columns pixels along v.
enum class EpiAxis { US, VT };

/// 4-D light field L(u, v, s, t) with samples in [0, 1].
///
/// Storage is channel-planar: ((((c * n_t + t) * n_s + s) * n_v + v) * n_u + u).
/// A 3-D light field has n_t == 1.
class LightField4D {
public:
    LightField4D() = default;
    LightField4D(int n_t, int n_s, int n_v, int n_u, int channels, ColorSpace cs);

    int n_t() const { return n_t_; }
    int n_s() const { return n_s_; }
    int n_v() const { return n_v_; }
    int n_u() const { return n_u_; }
    int channels() const { return channels_; }
    ColorSpace colorspace() const { return colorspace_; }
    void set_colorspace(ColorSpace cs) { colorspace_ = cs; }

    std::size_t index(int t, int s, int v, int u, int c = 0) const {
        return (((static_cast<std::size_t>(c) * n_t_ + t) * n_s_ + s) * n_v_ + v) * n_u_ + u;
    }
    double& at(int t, int s, int v, int u, int c = 0) { return samples_[index(t, s, v, u, c)]; }
    double at(int t, int s, int v, int u, int c = 0) const { return samples_[index(t, s, v, u, c)]; }

    /// One view as an n_v x n_u array.
    Array2 view(int t, int s, int c = 0) const;
    void set_view(int t, int s, int c, const Array2& img);

    std::vector<double>& samples() { return samples_; }
    const std::vector<double>& samples() const { return samples_; }

    bool same_geometry(const LightField4D& o) const {
        return n_t_ == o.n_t_ && n_s_ == o.n_s_ && n_v_ == o.n_v_ && n_u_ == o.n_u_ && channels_ == o.channels_;
    }

    void clamp01();

    friend bool operator==(const LightField4D&, const LightField4D&) = default;

private:
    int n_t_ = 0, n_s_ = 0, n_v_ = 0, n_u_ = 0, channels_ = 0;
    ColorSpace colorspace_ = ColorSpace::LUMA;
    std::vector<double> samples_;
};

/// Epipolar-plane image: rows are the angular axis, columns the spatial axis.
struct Epi {
    Array2 data;
    EpiAxis axis = EpiAxis::US;

    Epi() = default;
    explicit Epi(Array2 d, EpiAxis a = EpiAxis::US) : data(std::move(d)), axis(a) {}
    Epi(int n_a, int n_w, double fill = 0.0, EpiAxis a = EpiAxis::US) : data(n_a, n_w, fill), axis(a) {}

    int n_a() const { return data.rows(); }
    int n_w() const { return data.cols(); }
    double& operator()(int a, int w) { return data(a, w); }
    double operator()(int a, int w) const { return data(a, w); }

    friend bool operator==(const Epi&, const Epi&) = default;
};

// BT.601 full-range, Cb/Cr offset by 0.5.
LightField4D rgb_to_ycbcr(const LightField4D& lf);
LightField4D ycbcr_to_rgb(const LightField4D& lf);
/// Luma plane of an RGB or YCbCr light field; a LUMA field is returned as-is.
LightField4D to_luma(const LightField4D& lf);

/// US: data[s, u] = L(u, fixed_spatial=v, s, fixed_angular=t).
/// VT: data[t, v] = L(fixed_spatial=u, v, fixed_angular=s, t).
Epi extract_epi(const LightField4D& lf, EpiAxis axis, int fixed_spatial, int fixed_angular, int channel);
void insert_epi(LightField4D& lf, const Epi& epi, EpiAxis axis, int fixed_spatial, int fixed_angular, int channel);

/// Keeps rows 0, rate, 2*rate, ... ; requires (n_a - 1) % rate == 0.
Epi angular_decimate(const Epi& epi, int rate);

}  // namespace lapepi
