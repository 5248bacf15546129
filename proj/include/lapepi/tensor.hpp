// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lapepi/common.hpp"

namespace lapepi::net {

/// (batch, channel, angular, spatial) activations, row-major.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int n, int c, int h, int w, double fill = 0.0) : n_(n), c_(c), h_(h), w_(w) {
        if (n < 1 || c < 1 || h < 1 || w < 1) throw ShapeError("Tensor4 extents must be >= 1");
        data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
    }

    int n() const { return n_; }
    int c() const { return c_; }
    int h() const { return h_; }
    int w() const { return w_; }
    std::size_t size() const { return data_.size(); }
    std::size_t sample_size() const { return static_cast<std::size_t>(c_) * h_ * w_; }
    std::size_t plane_size() const { return static_cast<std::size_t>(h_) * w_; }

    std::size_t index(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * c_ + c) * h_ + h) * w_ + w;
    }
    double& operator()(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
    double operator()(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* sample(int n) { return data_.data() + static_cast<std::size_t>(n) * sample_size(); }
    const double* sample(int n) const { return data_.data() + static_cast<std::size_t>(n) * sample_size(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Tensor4& o) const { return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }

private:
    int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<double> data_;
};

double dot(const Tensor4& a, const Tensor4& b);

}  // namespace lapepi::net
