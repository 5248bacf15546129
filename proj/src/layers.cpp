// SPDX-License-Identifier: Apache-2.0
#include "lapepi/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <string>

namespace lapepi::net {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using OuterStride = Eigen::OuterStride<>;
using StridedMap = Eigen::Map<RowMat, 0, OuterStride>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, OuterStride>;

/// Geometry of one strided sliding window: image (C, H, W) sampled on a grid
/// (gh, gw) as image[c][gy*sa + i - pa][gx*sw + j - pw].
struct Window {
    int C, H, W;
    int ka, kw;
    int sa, sw;
    int pa, pw;
    int gh, gw;

    int rows() const { return C * ka * kw; }
    int cols() const { return gh * gw; }

    // Valid grid range [lo, hi) for kernel tap j along the spatial axis.
    void spatial_range(int j, int& lo, int& hi) const {
        const int off = j - pw;
        lo = off >= 0 ? 0 : (-off + sw - 1) / sw;
        hi = W - 1 - off < 0 ? 0 : (W - 1 - off) / sw + 1;
        hi = std::min(hi, gw);
        lo = std::min(lo, hi);
    }
};

// Columns for grid rows [gy0, gy1) only; the block has (gy1 - gy0) * gw columns.
void im2col(const double* img, const Window& g, int gy0, int gy1, double* col) {
    const int ngy = gy1 - gy0;
    const std::size_t ncols = static_cast<std::size_t>(ngy) * g.gw;
    for (int c = 0; c < g.C; ++c)
        for (int i = 0; i < g.ka; ++i)
            for (int j = 0; j < g.kw; ++j) {
                double* row = col + static_cast<std::size_t>((c * g.ka + i) * g.kw + j) * ncols;
                int lo, hi;
                g.spatial_range(j, lo, hi);
                const int off = j - g.pw;
                for (int gy = gy0; gy < gy1; ++gy) {
                    double* dst = row + static_cast<std::size_t>(gy - gy0) * g.gw;
                    const int iy = gy * g.sa + i - g.pa;
                    if (iy < 0 || iy >= g.H) {
                        std::fill(dst, dst + g.gw, 0.0);
                        continue;
                    }
                    const double* src = img + (static_cast<std::size_t>(c) * g.H + iy) * g.W;
                    for (int gx = 0; gx < lo; ++gx) dst[gx] = 0.0;
                    if (g.sw == 1) {
                        for (int gx = lo; gx < hi; ++gx) dst[gx] = src[gx + off];
                    } else {
                        for (int gx = lo; gx < hi; ++gx) dst[gx] = src[gx * g.sw + off];
                    }
                    for (int gx = hi; gx < g.gw; ++gx) dst[gx] = 0.0;
                }
            }
}

void col2im_add(const double* col, const Window& g, int gy0, int gy1, double* img) {
    const std::size_t ncols = static_cast<std::size_t>(gy1 - gy0) * g.gw;
    for (int c = 0; c < g.C; ++c)
        for (int i = 0; i < g.ka; ++i)
            for (int j = 0; j < g.kw; ++j) {
                const double* row = col + static_cast<std::size_t>((c * g.ka + i) * g.kw + j) * ncols;
                int lo, hi;
                g.spatial_range(j, lo, hi);
                const int off = j - g.pw;
                for (int gy = gy0; gy < gy1; ++gy) {
                    const int iy = gy * g.sa + i - g.pa;
                    if (iy < 0 || iy >= g.H) continue;
                    const double* src = row + static_cast<std::size_t>(gy - gy0) * g.gw;
                    double* dst = img + (static_cast<std::size_t>(c) * g.H + iy) * g.W;
                    for (int gx = lo; gx < hi; ++gx) dst[gx * g.sw + off] += src[gx];
                }
            }
}

// Grid rows per block so that one column block stays cache resident.
int block_rows(const Window& g) {
    constexpr std::size_t kTarget = 200000;  // doubles
    const std::size_t per_row = static_cast<std::size_t>(g.rows()) * g.gw;
    return static_cast<int>(std::clamp<std::size_t>(kTarget / std::max<std::size_t>(per_row, 1), 1, static_cast<std::size_t>(g.gh)));
}

std::vector<double>& scratch(int slot, std::size_t n) {
    thread_local std::vector<double> buffers[3];
    auto& b = buffers[slot];
    if (b.size() < n) b.resize(n);
    return b;
}

void check_filter(const FilterView& f) {
    if (f.k_a < 1 || f.k_w < 1 || f.k_a % 2 == 0 || f.k_w % 2 == 0) throw ShapeError("filters must have odd extents");
    if (f.weight.size() != static_cast<std::size_t>(f.out_ch) * f.in_ch * f.k_a * f.k_w)
        throw ShapeError("filter weight count does not match its shape");
    if (!f.bias.empty() && f.bias.size() != static_cast<std::size_t>(f.out_ch))
        throw ShapeError("bias length must equal out_ch");
}

void check_stride(Stride2 s) {
    if (s.a < 1 || s.w < 1) throw ShapeError("stride must be >= 1");
}

// Deconv weights as a (out*k_a*k_w, in) matrix: rows (o, i, j), columns c.
RowMat deconv_matrix(const FilterView& f) {
    const int kk = f.k_a * f.k_w;
    RowMat m(f.out_ch * kk, f.in_ch);
    for (int o = 0; o < f.out_ch; ++o)
        for (int c = 0; c < f.in_ch; ++c)
            for (int k = 0; k < kk; ++k)
                m(o * kk + k, c) = f.weight[(static_cast<std::size_t>(o) * f.in_ch + c) * kk + k];
    return m;
}

}  // namespace

double dot(const Tensor4& a, const Tensor4& b) {
    if (!a.same_shape(b)) throw ShapeError("dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

Tensor4 conv2d(const Tensor4& x, const FilterView& f, Stride2 stride) {
    check_filter(f);
    check_stride(stride);
    if (x.c() != f.in_ch)
        throw ShapeError("conv2d: input has " + std::to_string(x.c()) + " channels, filter expects " + std::to_string(f.in_ch));
    const Window g{x.c(), x.h(), x.w(), f.k_a, f.k_w, stride.a, stride.w, (f.k_a - 1) / 2, (f.k_w - 1) / 2,
                   (x.h() - 1) / stride.a + 1, (x.w() - 1) / stride.w + 1};
    Tensor4 y(x.n(), f.out_ch, g.gh, g.gw);
    const ConstMapMat wm(f.weight.data(), f.out_ch, g.rows());
    const bool pointwise = f.k_a == 1 && f.k_w == 1 && stride.a == 1 && stride.w == 1;
    const int br = block_rows(g);
    for (int n = 0; n < x.n(); ++n) {
        if (pointwise) {
            MapMat(y.sample(n), f.out_ch, g.cols()).noalias() = wm * ConstMapMat(x.sample(n), g.rows(), g.cols());
        } else {
            auto& buf = scratch(0, static_cast<std::size_t>(g.rows()) * br * g.gw);
            for (int gy0 = 0; gy0 < g.gh; gy0 += br) {
                const int gy1 = std::min(g.gh, gy0 + br);
                const int nc = (gy1 - gy0) * g.gw;
                im2col(x.sample(n), g, gy0, gy1, buf.data());
                StridedMap(y.sample(n) + static_cast<std::size_t>(gy0) * g.gw, f.out_ch, nc, OuterStride(g.cols())).noalias() =
                    wm * ConstMapMat(buf.data(), g.rows(), nc);
            }
        }
        MapMat ym(y.sample(n), f.out_ch, g.cols());
        if (!f.bias.empty())
            for (int o = 0; o < f.out_ch; ++o) ym.row(o).array() += f.bias[static_cast<std::size_t>(o)];
    }
    return y;
}

FilterGrads conv2d_backward(const Tensor4& x, const FilterView& f, Stride2 stride, const Tensor4& dy) {
    check_filter(f);
    const Window g{x.c(), x.h(), x.w(), f.k_a, f.k_w, stride.a, stride.w, (f.k_a - 1) / 2, (f.k_w - 1) / 2,
                   (x.h() - 1) / stride.a + 1, (x.w() - 1) / stride.w + 1};
    if (dy.n() != x.n() || dy.c() != f.out_ch || dy.h() != g.gh || dy.w() != g.gw)
        throw ShapeError("conv2d_backward: gradient shape mismatch");
    FilterGrads out{Tensor4(x.n(), x.c(), x.h(), x.w()), std::vector<double>(f.weight.size(), 0.0),
                    std::vector<double>(static_cast<std::size_t>(f.out_ch), 0.0)};
    const ConstMapMat wm(f.weight.data(), f.out_ch, g.rows());
    MapMat dwm(out.dw.data(), f.out_ch, g.rows());
    const bool pointwise = f.k_a == 1 && f.k_w == 1 && stride.a == 1 && stride.w == 1;
    const int br = block_rows(g);
    for (int n = 0; n < x.n(); ++n) {
        const ConstMapMat dym(dy.sample(n), f.out_ch, g.cols());
        for (int o = 0; o < f.out_ch; ++o) out.db[static_cast<std::size_t>(o)] += dym.row(o).sum();
        if (pointwise) {
            dwm.noalias() += dym * ConstMapMat(x.sample(n), g.rows(), g.cols()).transpose();
            MapMat(out.dx.sample(n), g.rows(), g.cols()).noalias() = wm.transpose() * dym;
            continue;
        }
        auto& col = scratch(0, static_cast<std::size_t>(g.rows()) * br * g.gw);
        auto& dcol = scratch(1, static_cast<std::size_t>(g.rows()) * br * g.gw);
        for (int gy0 = 0; gy0 < g.gh; gy0 += br) {
            const int gy1 = std::min(g.gh, gy0 + br);
            const int nc = (gy1 - gy0) * g.gw;
            const ConstStridedMap dyb(dy.sample(n) + static_cast<std::size_t>(gy0) * g.gw, f.out_ch, nc, OuterStride(g.cols()));
            im2col(x.sample(n), g, gy0, gy1, col.data());
            dwm.noalias() += dyb * ConstMapMat(col.data(), g.rows(), nc).transpose();
            MapMat(dcol.data(), g.rows(), nc).noalias() = wm.transpose() * dyb;
            col2im_add(dcol.data(), g, gy0, gy1, out.dx.sample(n));
        }
    }
    return out;
}

Tensor4 deconv2d(const Tensor4& x, const FilterView& f, Stride2 stride) {
    check_filter(f);
    check_stride(stride);
    if (x.c() != f.in_ch)
        throw ShapeError("deconv2d: input has " + std::to_string(x.c()) + " channels, filter expects " + std::to_string(f.in_ch));
    if ((stride.a > 1 && x.h() < 2) || (stride.w > 1 && x.w() < 2))
        throw ShapeError("deconv2d: strided axes need at least 2 samples");
    const int ho = stride.a * (x.h() - 1) + 1;
    const int wo = stride.w * (x.w() - 1) + 1;
    const Window g{f.out_ch, ho, wo, f.k_a, f.k_w, stride.a, stride.w, (f.k_a - 1) / 2, (f.k_w - 1) / 2, x.h(), x.w()};
    Tensor4 y(x.n(), f.out_ch, ho, wo);
    const RowMat wt = deconv_matrix(f);
    const int br = block_rows(g);
    for (int n = 0; n < x.n(); ++n) {
        auto& col = scratch(0, static_cast<std::size_t>(g.rows()) * br * g.gw);
        for (int gy0 = 0; gy0 < g.gh; gy0 += br) {
            const int gy1 = std::min(g.gh, gy0 + br);
            const int nc = (gy1 - gy0) * g.gw;
            MapMat(col.data(), g.rows(), nc).noalias() =
                wt * ConstStridedMap(x.sample(n) + static_cast<std::size_t>(gy0) * g.gw, f.in_ch, nc, OuterStride(g.cols()));
            col2im_add(col.data(), g, gy0, gy1, y.sample(n));
        }
        if (!f.bias.empty()) {
            MapMat ym(y.sample(n), f.out_ch, ho * wo);
            for (int o = 0; o < f.out_ch; ++o) ym.row(o).array() += f.bias[static_cast<std::size_t>(o)];
        }
    }
    return y;
}

FilterGrads deconv2d_backward(const Tensor4& x, const FilterView& f, Stride2 stride, const Tensor4& dy) {
    check_filter(f);
    const int ho = stride.a * (x.h() - 1) + 1;
    const int wo = stride.w * (x.w() - 1) + 1;
    if (dy.n() != x.n() || dy.c() != f.out_ch || dy.h() != ho || dy.w() != wo)
        throw ShapeError("deconv2d_backward: gradient shape mismatch");
    const Window g{f.out_ch, ho, wo, f.k_a, f.k_w, stride.a, stride.w, (f.k_a - 1) / 2, (f.k_w - 1) / 2, x.h(), x.w()};
    FilterGrads out{Tensor4(x.n(), x.c(), x.h(), x.w()), std::vector<double>(f.weight.size()),
                    std::vector<double>(static_cast<std::size_t>(f.out_ch), 0.0)};
    const RowMat wt = deconv_matrix(f);
    RowMat dwt = RowMat::Zero(wt.rows(), wt.cols());
    const int br = block_rows(g);
    for (int n = 0; n < x.n(); ++n) {
        const ConstMapMat dym(dy.sample(n), f.out_ch, ho * wo);
        for (int o = 0; o < f.out_ch; ++o) out.db[static_cast<std::size_t>(o)] += dym.row(o).sum();
        auto& dcol = scratch(0, static_cast<std::size_t>(g.rows()) * br * g.gw);
        for (int gy0 = 0; gy0 < g.gh; gy0 += br) {
            const int gy1 = std::min(g.gh, gy0 + br);
            const int nc = (gy1 - gy0) * g.gw;
            im2col(dy.sample(n), g, gy0, gy1, dcol.data());
            const ConstMapMat dcolm(dcol.data(), g.rows(), nc);
            const std::size_t off = static_cast<std::size_t>(gy0) * g.gw;
            dwt.noalias() += dcolm * ConstStridedMap(x.sample(n) + off, f.in_ch, nc, OuterStride(g.cols())).transpose();
            StridedMap(out.dx.sample(n) + off, f.in_ch, nc, OuterStride(g.cols())).noalias() = wt.transpose() * dcolm;
        }
    }
    const int kk = f.k_a * f.k_w;
    for (int o = 0; o < f.out_ch; ++o)
        for (int c = 0; c < f.in_ch; ++c)
            for (int k = 0; k < kk; ++k) out.dw[(static_cast<std::size_t>(o) * f.in_ch + c) * kk + k] = dwt(o * kk + k, c);
    return out;
}

void prelu_in_place(Tensor4& x, std::span<const double> slope) {
    if (slope.size() != static_cast<std::size_t>(x.c())) throw ShapeError("prelu: slope length must equal channels");
    const std::size_t plane = x.plane_size();
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c) {
            double* p = x.sample(n) + c * plane;
            const double a = slope[static_cast<std::size_t>(c)];
            for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] < 0.0 ? a * p[i] : p[i];
        }
}

Tensor4 prelu(const Tensor4& x, std::span<const double> slope) {
    Tensor4 y = x;
    prelu_in_place(y, slope);
    return y;
}

PreluGrads prelu_backward(const Tensor4& x, std::span<const double> slope, const Tensor4& dy) {
    if (!x.same_shape(dy)) throw ShapeError("prelu_backward: shape mismatch");
    if (slope.size() != static_cast<std::size_t>(x.c())) throw ShapeError("prelu: slope length must equal channels");
    PreluGrads g{dy, std::vector<double>(slope.size(), 0.0)};
    const std::size_t plane = x.plane_size();
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c) {
            const double* xp = x.sample(n) + c * plane;
            double* dp = g.dx.sample(n) + c * plane;
            const double a = slope[static_cast<std::size_t>(c)];
            double ds = 0.0;
            // Branch-free so the loop vectorizes; signs are close to random.
            for (std::size_t i = 0; i < plane; ++i) {
                const bool neg = xp[i] < 0.0;
                ds += neg ? dp[i] * xp[i] : 0.0;
                dp[i] = neg ? a * dp[i] : dp[i];
            }
            g.dslope[static_cast<std::size_t>(c)] += ds;
        }
    return g;
}

}  // namespace lapepi::net
