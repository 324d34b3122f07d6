// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

#include <cstddef>

namespace ntc {

inline constexpr double kGdnEpsilon = 0x1.0p-18; // 2^-18
inline constexpr double kBetaMin = 1e-6;
inline constexpr double kGammaMin = 0.0;

// A parameter stored as nu and materialized as max(nu, c)^2 - epsilon^2 with
// c = sqrt(min_value + epsilon^2), so the materialized value never drops
// below min_value and gradients through the square stay bounded near zero.
struct NonNegParam {
    Tensor nu;
    double min_value = 0.0;
    double epsilon = kGdnEpsilon;

    double bound() const; // c

    // nu = sqrt(value + epsilon^2); requires value >= min_value elementwise.
    static NonNegParam init(const Tensor& value, double min_value, double epsilon = kGdnEpsilon);

    Tensor materialize() const;

    // dL/dnu from dL/dvalue. Below the clamp the gradient passes only when it
    // would move nu up toward the bound.
    Tensor vjp(const Tensor& upstream) const;
};

// Channel normalization y_i = z_i / sqrt(beta_i + sum_j gamma_ij z_j^2),
// applied across channels independently at each spatial position; the
// inverse flag multiplies by the square root instead (IGDN).
struct GdnParams {
    NonNegParam beta;  // [C]
    NonNegParam gamma; // [C,C]
    bool inverse = false;

    std::size_t channels() const { return beta.nu.extent(0); }

    // beta = 1, gamma = 0.1 * identity.
    static GdnParams make_default(std::size_t channels, bool inverse);
};

Tensor gdn_forward(const Tensor& z, const GdnParams& p);

struct GdnGrads {
    Tensor d_z;
    Tensor d_beta;  // w.r.t. materialized beta
    Tensor d_gamma; // w.r.t. materialized gamma
};

GdnGrads gdn_vjp(const Tensor& z, const GdnParams& p, const Tensor& upstream);

} // namespace ntc
