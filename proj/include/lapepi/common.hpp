// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapepi {

/// Base class for domain errors (bad input, inconsistent shapes, corrupt files).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Dense row-major 2-D array of doubles. Rows are the angular axis when the
/// array holds an EPI, columns the spatial axis.
class Array2 {
public:
    Array2() = default;
    Array2(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw ShapeError("Array2: negative extent");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(int r) const {
        return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Array2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const Array2&, const Array2&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Whole-sample mirror index: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
/// Periodic with period 2(n-1), so it is valid for any offset.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

inline int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline bool is_power_of(int value, int base) {
    if (value < 1 || base < 2) return false;
    while (value % base == 0) value /= base;
    return value == 1;
}

inline int int_pow(int base, int exp) {
    int r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

double max_abs_diff(const Array2& a, const Array2& b);

}  // namespace lapepi
