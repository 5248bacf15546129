// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "lapepi/tensor.hpp"

namespace lapepi::net {

struct Stride2 {
    int a = 1;  // angular
    int w = 1;  // spatial
};

/// Read-only view of a filter bank laid out (out_ch, in_ch, k_a, k_w).
/// The same layout is used for convolution and transposed convolution.
struct FilterView {
    int out_ch = 0;
    int in_ch = 0;
    int k_a = 1;
    int k_w = 1;
    std::span<const double> weight;
    std::span<const double> bias;  // empty means no bias
};

struct FilterGrads {
    Tensor4 dx;
    std::vector<double> dw;
    std::vector<double> db;
};

/// Cross-correlation with zero padding (k - 1) / 2 on each side of each axis.
/// Output extent per axis is (n - 1) / stride + 1, i.e. n at stride 1.
Tensor4 conv2d(const Tensor4& x, const FilterView& f, Stride2 stride = {});
FilterGrads conv2d_backward(const Tensor4& x, const FilterView& f, Stride2 stride, const Tensor4& dy);

/// Transposed convolution: full output stride * (n - 1) + k, cropped by
/// (k - 1) / 2 on both sides of every axis, giving stride * (n - 1) + 1.
/// With zero bias this is the exact adjoint of conv2d at the same stride when
/// the filter's in/out roles are swapped.
Tensor4 deconv2d(const Tensor4& x, const FilterView& f, Stride2 stride);
FilterGrads deconv2d_backward(const Tensor4& x, const FilterView& f, Stride2 stride, const Tensor4& dy);

/// y = x for x >= 0, slope[c] * x otherwise.
Tensor4 prelu(const Tensor4& x, std::span<const double> slope);
void prelu_in_place(Tensor4& x, std::span<const double> slope);

struct PreluGrads {
    Tensor4 dx;
    std::vector<double> dslope;
};
PreluGrads prelu_backward(const Tensor4& x, std::span<const double> slope, const Tensor4& dy);

}  // namespace lapepi::net
