// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

#include <cstddef>

namespace ntc {

// Real orthonormal DFT basis: row 0 is the constant 1/sqrt(n), followed by
// cosine/sine pairs scaled by sqrt(2/n), and for even n an alternating-sign
// Nyquist row scaled 1/sqrt(n). F * F^T = I.
struct RdftBasis {
    std::size_t n = 0;
    Tensor matrix; // [n,n]

    static RdftBasis make(std::size_t n);

    // Harmonic number of basis row r: 0 for DC, h for the cos/sin pair of
    // frequency h, n/2 for the Nyquist row.
    static std::size_t harmonic(std::size_t row);
};

// Per (a,b) slice of a [A,B,kh,kw] tensor: forward g = Fh * h * Fw^T,
// inverse h = Fh^T * g * Fw.
Tensor rdft2_apply(const Tensor& kernels, const RdftBasis& basis_h, const RdftBasis& basis_w,
                   bool inverse);
Tensor rdft2_apply(const Tensor& kernels, const RdftBasis& basis, bool inverse);

} // namespace ntc
