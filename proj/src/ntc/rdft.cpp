// SPDX-License-Identifier: Apache-2.0

#include "ntc/rdft.hpp"

#include "ntc/error.hpp"

#include <cmath>

namespace ntc {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// cos/sin of the fraction k/n of a full turn, with exact values at quarter
// turns and bitwise-negated supplementary pairs. Without this, harmonic rows
// do not sum to exactly zero and a constant input leaks ~1e-16 into non-DC
// coefficients, which a sign-normalizing optimizer then amplifies.
double cos_turn(std::size_t k, std::size_t n) {
    k %= n;
    if (k == 0) return 1.0;
    if (4 * k == n || 4 * k == 3 * n) return 0.0;
    if (2 * k == n) return -1.0;
    if (2 * k > n) k = n - k; // even symmetry
    if (4 * k > n && n % 2 == 0)
        return -std::cos(2.0 * kPi * static_cast<double>(n / 2 - k) / static_cast<double>(n));
    return std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
}

double sin_turn(std::size_t k, std::size_t n) {
    k %= n;
    if (k == 0 || 2 * k == n) return 0.0;
    if (4 * k == n) return 1.0;
    if (4 * k == 3 * n) return -1.0;
    bool neg = false;
    if (2 * k > n) { // odd symmetry
        k = n - k;
        neg = true;
    }
    if (4 * k > n && n % 2 == 0) k = n / 2 - k; // sin(pi - x) = sin(x)
    const double v = std::sin(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    return neg ? -v : v;
}

} // namespace

RdftBasis RdftBasis::make(std::size_t n) {
    require(n >= 1, "rdft_basis: extent must be positive");
    RdftBasis b;
    b.n = n;
    b.matrix = Tensor({n, n});
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const double pair_scale = std::sqrt(2.0 / static_cast<double>(n));

    for (std::size_t t = 0; t < n; ++t) b.matrix(std::size_t{0}, t) = inv_sqrt_n;

    const std::size_t pairs = (n - 1) / 2;
    for (std::size_t h = 1; h <= pairs; ++h) {
        for (std::size_t t = 0; t < n; ++t) {
            b.matrix(2 * h - 1, t) = pair_scale * cos_turn(h * t, n);
            b.matrix(2 * h, t) = pair_scale * sin_turn(h * t, n);
        }
    }
    if (n % 2 == 0 && n > 1) {
        for (std::size_t t = 0; t < n; ++t)
            b.matrix(n - 1, t) = (t % 2 == 0 ? inv_sqrt_n : -inv_sqrt_n);
    }
    return b;
}

std::size_t RdftBasis::harmonic(std::size_t row) {
    return (row + 1) / 2;
}

namespace {

// dst = F * src * G^T for one k_h x k_w slice (or transposed variants).
void slice_transform(const double* src, double* dst, const Tensor& fh, const Tensor& fw,
                     std::size_t kh, std::size_t kw, bool transpose_bases,
                     std::vector<double>& scratch) {
    // scratch holds F * src, sized kh x kw
    for (std::size_t r = 0; r < kh; ++r)
        for (std::size_t c = 0; c < kw; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < kh; ++t) {
                const double f = transpose_bases ? fh[t * kh + r] : fh[r * kh + t];
                acc += f * src[t * kw + c];
            }
            scratch[r * kw + c] = acc;
        }
    for (std::size_t r = 0; r < kh; ++r)
        for (std::size_t c = 0; c < kw; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < kw; ++t) {
                const double g = transpose_bases ? fw[t * kw + c] : fw[c * kw + t];
                acc += scratch[r * kw + t] * g;
            }
            dst[r * kw + c] = acc;
        }
}

} // namespace

Tensor rdft2_apply(const Tensor& kernels, const RdftBasis& basis_h, const RdftBasis& basis_w,
                   bool inverse) {
    require(kernels.rank() == 4, "rdft2_apply: kernels must be [A,B,kh,kw]");
    const std::size_t kh = kernels.extent(2), kw = kernels.extent(3);
    require(basis_h.n == kh && basis_w.n == kw, "rdft2_apply: basis extent mismatch");

    Tensor out(kernels.shape());
    const std::size_t slices = kernels.extent(0) * kernels.extent(1);
    std::vector<double> scratch(kh * kw);
    for (std::size_t sl = 0; sl < slices; ++sl) {
        const double* src = kernels.data() + sl * kh * kw;
        double* dst = out.data() + sl * kh * kw;
        slice_transform(src, dst, basis_h.matrix, basis_w.matrix, kh, kw, inverse, scratch);
    }
    return out;
}

Tensor rdft2_apply(const Tensor& kernels, const RdftBasis& basis, bool inverse) {
    return rdft2_apply(kernels, basis, basis, inverse);
}

} // namespace ntc
