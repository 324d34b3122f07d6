// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

#include <cstddef>

namespace ntc {

// Zero-padding amounts per spatial axis, derived from kernel extent and
// stride so that a stride-s layer maps H exactly to H/s (down) or H*s (up).
struct PadSpec {
    std::size_t begin;
    std::size_t end;
};

PadSpec pad_for(std::size_t k, std::size_t s); // begin=floor((k-s)/2), end=ceil((k-s)/2)

// For conv layers kernels are [out_channels, in_channels, k, k]; for upconv
// (transposed) layers they are [in_channels, out_channels, k, k]. Bias is
// always one value per output channel. Kernels narrower than the stride
// subsample without padding.
struct ConvLayerParams {
    Tensor kernels;
    Tensor bias;
    std::size_t stride = 1;
};

struct ConvGrads {
    Tensor d_input;
    Tensor d_kernels;
    Tensor d_bias;
};

// Strided convolution with zero boundary handling: [C_in,H,W] -> [C_out,H/s,W/s].
Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& p);
ConvGrads conv2d_vjp(const Tensor& input, const ConvLayerParams& p, const Tensor& upstream);

// Exact adjoint of the strided convolution with the same geometry:
// [C_in,H,W] -> [C_out,H*s,W*s], plus bias per output channel.
Tensor upconv2d_forward(const Tensor& input, const ConvLayerParams& p);
ConvGrads upconv2d_vjp(const Tensor& input, const ConvLayerParams& p, const Tensor& upstream);

} // namespace ntc
