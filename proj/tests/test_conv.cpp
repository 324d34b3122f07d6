// SPDX-License-Identifier: Apache-2.0

#include "ntc/conv.hpp"

#include "ntc/error.hpp"
#include "ntc/fdiff.hpp"
#include "ntc/rng.hpp"

#include <doctest.h>

using namespace ntc;

namespace {

Tensor randn(const Shape& shape, Rng& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

ConvLayerParams one_by_one(double weight, double bias, std::size_t stride) {
    return {Tensor({1, 1, 1, 1}, {weight}), Tensor({1}, {bias}), stride};
}

} // namespace

TEST_CASE("PadSpec splits k - s between the two sides") {
    PadSpec p = pad_for(9, 4);
    CHECK(p.begin == 2);
    CHECK(p.end == 3);
    p = pad_for(5, 2);
    CHECK(p.begin == 1);
    CHECK(p.end == 2);
    p = pad_for(3, 3);
    CHECK(p.begin == 0);
    CHECK(p.end == 0);
    CHECK_THROWS_AS(pad_for(1, 2), ContractViolation);
}

TEST_CASE("identity 1x1 kernel reproduces the input") {
    Tensor x({1, 2, 2}, {1, 2, 3, 4});
    Tensor y = conv2d_forward(x, one_by_one(1.0, 0.0, 1));
    CHECK(y.shape() == Shape{1, 2, 2});
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("stride-2 1x1 kernel subsamples") {
    Tensor x({1, 4, 4});
    for (std::size_t i = 0; i < 16; ++i) x[i] = static_cast<double>(i);
    Tensor y = conv2d_forward(x, one_by_one(1.0, 0.0, 2));
    CHECK(y.shape() == Shape{1, 2, 2});
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 2.0);
    CHECK(y[2] == 8.0);
    CHECK(y[3] == 10.0);
}

TEST_CASE("3x3 ones kernel with zero padding sums the neighborhoods") {
    Tensor x = Tensor::full({1, 3, 3}, 1.0);
    ConvLayerParams p{Tensor::full({1, 1, 3, 3}, 1.0), Tensor({1}), 1};
    Tensor y = conv2d_forward(x, p);
    CHECK(y(0, 1, 1) == 9.0);
    CHECK(y(0, 0, 1) == 6.0);
    CHECK(y(0, 1, 0) == 6.0);
    CHECK(y(0, 0, 0) == 4.0);
    CHECK(y(0, 2, 2) == 4.0);
}

TEST_CASE("conv rejects inconsistent shapes") {
    Tensor x({2, 4, 4});
    ConvLayerParams p{Tensor({1, 1, 3, 3}), Tensor({1}), 1};
    CHECK_THROWS_AS(conv2d_forward(x, p), ContractViolation); // channel mismatch

    Tensor x3({1, 5, 4});
    ConvLayerParams s2{Tensor({1, 1, 3, 3}), Tensor({1}), 2};
    CHECK_THROWS_AS(conv2d_forward(x3, s2), ContractViolation); // 5 not divisible by 2

    ConvLayerParams bad_bias{Tensor({2, 1, 3, 3}), Tensor({1}), 1};
    CHECK_THROWS_AS(conv2d_forward(Tensor({1, 4, 4}), bad_bias), ContractViolation);

    ConvLayerParams rect{Tensor({1, 1, 3, 2}), Tensor({1}), 1};
    CHECK_THROWS_AS(conv2d_forward(Tensor({1, 4, 4}), rect), ContractViolation);
}

TEST_CASE("conv vjp with zero upstream is zero") {
    Rng rng(7);
    Tensor x = randn({2, 4, 4}, rng);
    ConvLayerParams p{randn({3, 2, 3, 3}, rng), randn({3}, rng), 1};
    ConvGrads g = conv2d_vjp(x, p, Tensor({3, 4, 4}));
    CHECK(max_abs(g.d_input) == 0.0);
    CHECK(max_abs(g.d_kernels) == 0.0);
    CHECK(max_abs(g.d_bias) == 0.0);
}

TEST_CASE("1x1 kernel gradient is the input/upstream correlation") {
    Rng rng(11);
    Tensor x = randn({1, 3, 3}, rng);
    Tensor up = randn({1, 3, 3}, rng);
    ConvLayerParams p = one_by_one(0.7, 0.1, 1);
    ConvGrads g = conv2d_vjp(x, p, up);
    CHECK(g.d_kernels[0] == doctest::Approx(dot(x, up)).epsilon(1e-12));
    CHECK(g.d_bias[0] == doctest::Approx(sum(up)).epsilon(1e-12));
}

TEST_CASE("upconv 1x1 stride-2 places values on the even grid") {
    Tensor x({1, 2, 2}, {1, 2, 3, 4});
    ConvLayerParams p{Tensor({1, 1, 1, 1}, {1.0}), Tensor({1}), 2};
    Tensor y = upconv2d_forward(x, p);
    CHECK(y.shape() == Shape{1, 4, 4});
    CHECK(y(0, 0, 0) == 1.0);
    CHECK(y(0, 0, 2) == 2.0);
    CHECK(y(0, 2, 0) == 3.0);
    CHECK(y(0, 2, 2) == 4.0);
    double off_grid = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (!(i % 2 == 0 && j % 2 == 0)) off_grid += std::fabs(y(0, i, j));
    CHECK(off_grid == 0.0);
}

TEST_CASE("upconv of zero input is the bias plane") {
    ConvLayerParams p{Tensor({2, 3, 5, 5}), Tensor({3}, {0.5, -1.0, 2.0}), 2};
    Tensor y = upconv2d_forward(Tensor({2, 3, 3}), p);
    CHECK(y.shape() == Shape{3, 6, 6});
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t e = 0; e < 36; ++e) CHECK(y[c * 36 + e] == p.bias[c]);
}

TEST_CASE("conv/upconv adjoint identity") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t s = 1 + rng.below(2);
        const std::size_t k = s + rng.below(3);
        const std::size_t ci = 1 + rng.below(2), co = 1 + rng.below(2);
        const std::size_t h = s * (2 + rng.below(2));
        Tensor x = randn({ci, h, h}, rng);
        Tensor kernels = randn({co, ci, k, k}, rng);
        Tensor u = randn({co, h / s, h / s}, rng);
        ConvLayerParams fwd{kernels, Tensor({co}), s};
        ConvLayerParams adj{kernels, Tensor({ci}), s};
        const double lhs = dot(conv2d_forward(x, fwd), u);
        const double rhs = dot(x, upconv2d_forward(u, adj));
        CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(lhs)));
    }
}

TEST_CASE("upconv vjp: zero upstream, finite differences, adjoint algebra") {
    Rng rng(17);
    Tensor x = randn({2, 2, 2}, rng);
    ConvLayerParams p{randn({2, 3, 4, 4}, rng), randn({3}, rng), 2};

    ConvGrads zero = upconv2d_vjp(x, p, Tensor({3, 4, 4}));
    CHECK(max_abs(zero.d_input) == 0.0);
    CHECK(max_abs(zero.d_kernels) == 0.0);

    Tensor up = randn({3, 4, 4}, rng);
    ConvGrads g = upconv2d_vjp(x, p, up);
    auto f = [&] { return dot(up, upconv2d_forward(x, p)); };
    CHECK(max_rel_err_fd(f, x, g.d_input) <= 1e-6);
    CHECK(max_rel_err_fd(f, p.kernels, g.d_kernels) <= 1e-6);
    CHECK(max_rel_err_fd(f, p.bias, g.d_bias) <= 1e-6);

    // transpose of transpose: pulling the gradient back through the upconv is
    // the forward strided convolution
    ConvLayerParams conv_view{p.kernels, Tensor({2}), 2};
    CHECK(max_abs_diff(g.d_input, conv2d_forward(up, conv_view)) == 0.0);
}

TEST_CASE("conv output shape contract") {
    Rng rng(19);
    Tensor x = randn({3, 8, 12}, rng);
    ConvLayerParams p{randn({5, 3, 5, 5}, rng), randn({5}, rng), 2};
    CHECK(conv2d_forward(x, p).shape() == Shape{5, 4, 6});
    ConvLayerParams up{randn({3, 5, 5, 5}, rng), randn({5}, rng), 2};
    CHECK(upconv2d_forward(x, up).shape() == Shape{5, 16, 24});
}
