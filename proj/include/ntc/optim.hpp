// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/rdft.hpp"
#include "ntc/tensor.hpp"

#include <cstdint>
#include <span>

namespace ntc {

struct AdamConfig {
    double rho = 1e-4;
    double decay1 = 0.9;
    double decay2 = 0.999;
    double guard = 1e-8;
};

// Diagonal-moment Adam with bias correction.
struct AdamState {
    Tensor m;
    Tensor v;
    std::uint64_t t = 0;
    AdamConfig cfg;

    static AdamState make(const Shape& shape, const AdamConfig& cfg);
};

void adam_step(AdamState& state, Tensor& param, const Tensor& grad);

// Adam whose moments live in the 2-D RDFT domain of each [a,b] kernel slice;
// the parameter itself stays spatial. With orthonormal bases this equals
// running Adam on fully spectral parameters.
struct SadamState {
    AdamState spectral;
    RdftBasis basis_h;
    RdftBasis basis_w;

    static SadamState make(const Shape& kernel_shape, const AdamConfig& cfg);
};

void sadam_step(SadamState& state, Tensor& kernels, const Tensor& grad);

// P such that cov(P x) is approximately identity on the sampled distribution:
// symmetric inverse square root of the sample covariance, eigenvalue-floored.
struct WhiteningOperator {
    Tensor p; // [d,d]

    static WhiteningOperator identity(std::size_t d);
};

// samples: [count, d] rows; requires count >= d.
WhiteningOperator estimate_whitener(const Tensor& samples, double eigen_floor = 1e-8);

// h -= rho * sum_b coeffs[b] * P * x_b. samples is [count, d], h is [d].
void whitened_sgd_step(Tensor& h, std::span<const double> coeffs, const Tensor& samples,
                       const WhiteningOperator& whitener, double rho);

// Plain SGD counterpart: h -= rho * sum_b coeffs[b] * x_b.
void sgd_step(Tensor& h, std::span<const double> coeffs, const Tensor& samples, double rho);

} // namespace ntc
