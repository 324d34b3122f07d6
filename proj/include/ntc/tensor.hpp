// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/error.hpp"

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

namespace ntc {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
}

// Dense multi-dimensional array of 64-bit reals, row-major (last index fastest).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

    Tensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        require(data_.size() == shape_size(shape_), "tensor: data length does not match shape");
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, double value) {
        Tensor t(std::move(shape));
        for (double& x : t.data_) x = value;
        return t;
    }

    static Tensor scalar(double value) { return Tensor({1}, {value}); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Row-major multi-index access; index count must equal the rank.
    template <class... Ix>
    double& operator()(Ix... ix) {
        return data_[offset(ix...)];
    }
    template <class... Ix>
    double operator()(Ix... ix) const {
        return data_[offset(ix...)];
    }

    void fill(double value) {
        for (double& x : data_) x = value;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    // Same data, new extents; element count must be preserved.
    Tensor reshaped(Shape shape) const {
        require(shape_size(shape) == data_.size(), "reshape: element count mismatch");
        return Tensor(std::move(shape), data_);
    }

private:
    template <class... Ix>
    std::size_t offset(Ix... ix) const {
        constexpr std::size_t n = sizeof...(Ix);
        const std::size_t idx[n] = {static_cast<std::size_t>(ix)...};
        std::size_t off = 0;
        for (std::size_t d = 0; d < n; ++d) off = off * shape_[d] + idx[d];
        return off;
    }

    Shape shape_;
    std::vector<double> data_;
};

double dot(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
double sum(const Tensor& a);

// y += a * x (elementwise); routed through the active kernel backend.
void add_scaled(Tensor& y, const Tensor& x, double a);
void scale(Tensor& t, double a);

} // namespace ntc
