// SPDX-License-Identifier: Apache-2.0
//
// Equivalence tests for the dispatch kernels: every available backend must
// reproduce the scalar reference bit-for-bit (lanes map to independent output
// elements and accumulate in the reference order).

#include "ntc/kernels.hpp"

#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

#include <doctest.h>

#include <vector>

using namespace ntc;
using namespace ntc::kernels;

namespace {

std::vector<double> randv(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

struct Case {
    ConvDims dims;
    std::vector<double> kernels, xpad, z;
};

Case random_case(Rng& rng) {
    // geometry pool includes the codec layers (9/4, 5/2) and widths spanning
    // several simd chunks plus tails
    static constexpr std::size_t strides[] = {1, 1, 2, 2, 4};
    static constexpr std::size_t kernel_extra[] = {0, 1, 2, 3, 5};
    Case c;
    c.dims.a_channels = 1 + rng.below(3);
    c.dims.b_channels = 1 + rng.below(3);
    c.dims.stride = strides[rng.below(5)];
    c.dims.k = c.dims.stride + kernel_extra[rng.below(5)];
    c.dims.out_h = 1 + rng.below(5);
    c.dims.out_w = 1 + rng.below(33);
    c.kernels = randv(c.dims.kernel_count(), rng);
    c.xpad = randv(c.dims.b_channels * c.dims.pad_h() * c.dims.pad_w(), rng);
    c.z = randv(c.dims.a_channels * c.dims.out_h * c.dims.out_w, rng);
    return c;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace

TEST_CASE("scalar backend is always available and selected tables are sane") {
    CHECK(backend_available(Backend::scalar));
    CHECK(scalar_ops().conv_gather != nullptr);
    const Ops& active_table = ops();
    CHECK(active_table.conv_gather != nullptr);
    CHECK(active_table.axpy != nullptr);
}

TEST_CASE("simd variants match the scalar reference bit-for-bit") {
    for (Backend b : available_backends()) {
        if (b == Backend::scalar) continue;
        const Ops& simd = backend_ops(b);
        const Ops& ref = scalar_ops();
        CAPTURE(backend_name(b));
        Rng rng(2024);
        for (int trial = 0; trial < 200; ++trial) {
            Case c = random_case(rng);

            std::vector<double> z_ref(c.z.size(), 0.0), z_simd(c.z.size(), 0.0);
            ref.conv_gather(c.kernels.data(), c.xpad.data(), z_ref.data(), c.dims);
            simd.conv_gather(c.kernels.data(), c.xpad.data(), z_simd.data(), c.dims);
            CHECK(bit_equal(z_ref, z_simd));

            std::vector<double> x_ref(c.xpad.size(), 0.0), x_simd(c.xpad.size(), 0.0);
            ref.conv_scatter(c.kernels.data(), c.z.data(), x_ref.data(), c.dims);
            simd.conv_scatter(c.kernels.data(), c.z.data(), x_simd.data(), c.dims);
            CHECK(bit_equal(x_ref, x_simd));

            std::vector<double> dk_ref(c.kernels.size(), 0.0), dk_simd(c.kernels.size(), 0.0);
            ref.conv_kernel_grad(c.z.data(), c.xpad.data(), dk_ref.data(), c.dims);
            simd.conv_kernel_grad(c.z.data(), c.xpad.data(), dk_simd.data(), c.dims);
            CHECK(bit_equal(dk_ref, dk_simd));

            std::vector<double> y_ref = randv(37, rng);
            std::vector<double> y_simd = y_ref;
            std::vector<double> x = randv(37, rng);
            ref.axpy(1.7, x.data(), y_ref.data(), x.size());
            simd.axpy(1.7, x.data(), y_simd.data(), x.size());
            CHECK(bit_equal(y_ref, y_simd));
        }
    }
}

TEST_CASE("backend selection round trip") {
    const Backend before = active();
    select(Backend::scalar);
    CHECK(active() == Backend::scalar);
    select_auto();
    select(before);
    CHECK(active() == before);
}
