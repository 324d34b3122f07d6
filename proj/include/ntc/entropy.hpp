// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

#include <cstddef>

namespace ntc {

enum class QuantizerMode { train, eval };

// train: y + u with u ~ U(-1/2, 1/2) per element; eval: round half away from zero.
Tensor quantize(const Tensor& y, QuantizerMode mode, Rng* rng);

Tensor sample_unit_noise(const Shape& shape, Rng& rng); // U(-1/2, 1/2)

// Per-channel logistic location/scale model evaluated as CDF differences over
// unit bins. The raw scale is materialized as softplus(sigma) + 1e-6.
struct FactorizedDensity {
    Tensor mu;    // [C]
    Tensor sigma; // [C], raw
    static FactorizedDensity make(std::size_t channels); // mu = 0, scale = 1
    double scale(std::size_t c) const;

    std::size_t channels() const { return mu.extent(0); }
};

inline constexpr double kLikelihoodFloor = 0x1.0p-50; // 2^-50
inline constexpr double kScaleFloor = 1e-6;

// p(y) = L((y + 1/2 - mu)/s) - L((y - 1/2 - mu)/s), clamped below at 2^-50.
// y_tilde is [C, ...] with channels on the leading axis.
Tensor likelihood(const Tensor& y_tilde, const FactorizedDensity& density);

// -sum log2 p
double rate_bits(const Tensor& likelihoods);

struct LikelihoodGrads {
    Tensor d_y;     // same shape as y_tilde
    Tensor d_mu;    // [C]
    Tensor d_sigma; // [C], w.r.t. the raw sigma
};

// Exact derivatives of `likelihood`; zero wherever the floor clamp is active.
LikelihoodGrads likelihood_vjp(const Tensor& y_tilde, const FactorizedDensity& density,
                               const Tensor& upstream);

} // namespace ntc
