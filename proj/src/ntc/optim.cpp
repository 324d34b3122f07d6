// SPDX-License-Identifier: Apache-2.0

#include "ntc/optim.hpp"

#include "ntc/error.hpp"
#include "ntc/linalg.hpp"

#include <cmath>

namespace ntc {

AdamState AdamState::make(const Shape& shape, const AdamConfig& cfg) {
    AdamState s;
    s.m = Tensor(shape);
    s.v = Tensor(shape);
    s.t = 0;
    s.cfg = cfg;
    return s;
}

void adam_step(AdamState& state, Tensor& param, const Tensor& grad) {
    require(param.same_shape(state.m), "adam_step: state shape mismatch");
    require(grad.same_shape(param), "adam_step: grad shape mismatch");
    require(state.cfg.rho > 0.0, "adam_step: step size must be positive");

    state.t += 1;
    const double b1 = state.cfg.decay1, b2 = state.cfg.decay2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double mhat = state.m[i] / corr1;
        const double vhat = state.v[i] / corr2;
        param[i] -= state.cfg.rho * mhat / (std::sqrt(vhat) + state.cfg.guard);
    }
}

SadamState SadamState::make(const Shape& kernel_shape, const AdamConfig& cfg) {
    require(kernel_shape.size() == 4, "sadam: kernel shape must be [A,B,kh,kw]");
    SadamState s;
    s.spectral = AdamState::make(kernel_shape, cfg);
    s.basis_h = RdftBasis::make(kernel_shape[2]);
    s.basis_w = RdftBasis::make(kernel_shape[3]);
    return s;
}

void sadam_step(SadamState& state, Tensor& kernels, const Tensor& grad) {
    require(kernels.rank() == 4, "sadam_step: kernels must be [A,B,kh,kw]");
    require(kernels.extent(2) == state.basis_h.n && kernels.extent(3) == state.basis_w.n,
            "sadam_step: kernel extents do not match stored bases");
    require(grad.same_shape(kernels), "sadam_step: grad shape mismatch");

    const Tensor spectral_grad = rdft2_apply(grad, state.basis_h, state.basis_w, false);

    // Run the Adam recursion on a zero spectral parameter to obtain the
    // spectral-domain update, then rotate the update back.
    Tensor delta(kernels.shape());
    adam_step(state.spectral, delta, spectral_grad);
    const Tensor spatial_delta = rdft2_apply(delta, state.basis_h, state.basis_w, true);
    for (std::size_t i = 0; i < kernels.size(); ++i) kernels[i] += spatial_delta[i];
}

WhiteningOperator WhiteningOperator::identity(std::size_t d) {
    WhiteningOperator w;
    w.p = Tensor({d, d});
    for (std::size_t i = 0; i < d; ++i) w.p(i, i) = 1.0;
    return w;
}

WhiteningOperator estimate_whitener(const Tensor& samples, double eigen_floor) {
    require(samples.rank() == 2, "estimate_whitener: samples must be [count,d]");
    const std::size_t count = samples.extent(0), d = samples.extent(1);
    require(count >= d, "estimate_whitener: need at least dimension-many samples");

    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t j = 0; j < d; ++j) mean[j] += samples[r * d + j];
    for (double& x : mean) x /= static_cast<double>(count);

    Tensor cov({d, d});
    for (std::size_t r = 0; r < count; ++r) {
        const double* row = samples.data() + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            const double ci = row[i] - mean[i];
            for (std::size_t j = i; j < d; ++j) cov(i, j) += ci * (row[j] - mean[j]);
        }
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(count);
            cov(j, i) = cov(i, j);
        }

    const SymEig eig = jacobi_eigensymm(cov);
    Tensor scaled({d, d}); // columns v_i / sqrt(max(lambda_i, floor))
    for (std::size_t i = 0; i < d; ++i) {
        const double lam = eig.values[i] > eigen_floor ? eig.values[i] : eigen_floor;
        const double inv = 1.0 / std::sqrt(lam);
        for (std::size_t r = 0; r < d; ++r) scaled(r, i) = eig.vectors(r, i) * inv;
    }
    WhiteningOperator w;
    w.p = matmul(scaled, transpose(eig.vectors));
    return w;
}

void whitened_sgd_step(Tensor& h, std::span<const double> coeffs, const Tensor& samples,
                       const WhiteningOperator& whitener, double rho) {
    require(samples.rank() == 2, "whitened_sgd_step: samples must be [count,d]");
    const std::size_t count = samples.extent(0), d = samples.extent(1);
    require(h.size() == d, "whitened_sgd_step: filter extent mismatch");
    require(coeffs.size() == count, "whitened_sgd_step: one coefficient per sample required");
    require(whitener.p.rank() == 2 && whitener.p.extent(0) == d && whitener.p.extent(1) == d,
            "whitened_sgd_step: whitener extent mismatch");

    std::vector<double> px(d);
    for (std::size_t b = 0; b < count; ++b) {
        const double* x = samples.data() + b * d;
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            const double* prow = whitener.p.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) acc += prow[j] * x[j];
            px[i] = acc;
        }
        const double c = coeffs[b];
        for (std::size_t i = 0; i < d; ++i) h[i] -= rho * c * px[i];
    }
}

void sgd_step(Tensor& h, std::span<const double> coeffs, const Tensor& samples, double rho) {
    require(samples.rank() == 2, "sgd_step: samples must be [count,d]");
    const std::size_t count = samples.extent(0), d = samples.extent(1);
    require(h.size() == d, "sgd_step: filter extent mismatch");
    require(coeffs.size() == count, "sgd_step: one coefficient per sample required");
    for (std::size_t b = 0; b < count; ++b) {
        const double* x = samples.data() + b * d;
        const double c = coeffs[b];
        for (std::size_t i = 0; i < d; ++i) h[i] -= rho * c * x[i];
    }
}

} // namespace ntc
