// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/transform.hpp"

namespace ntc {

// L = R + lambda * D with R in bits per pixel and D the mean squared error of
// the reconstruction on the [0,1] scale.
struct LossBreakdown {
    double total = 0.0;
    double rate_bpp = 0.0;
    double distortion = 0.0;
};

struct LossResult {
    LossBreakdown loss;
    ModelGrads grads;
};

// Training relaxation with an explicit noise sample (the sampled noise is
// treated as a constant by the gradient). This is the finite-difference
// checkable path.
LossResult rd_loss_with_noise(const Tensor& x, const Model& m, double lambda,
                              const Tensor& noise);

// Samples U(-1/2,1/2) noise from `rng`, then defers to rd_loss_with_noise.
LossResult rd_loss(const Tensor& x, const Model& m, double lambda, Rng& rng);

// Evaluation metrics under rounding quantization (no gradients).
struct EvalMetrics {
    double bits = 0.0;
    double bpp = 0.0;
    double mse = 0.0;
};
EvalMetrics rd_metrics_eval(const Tensor& x, const Model& m);

double psnr_db(double mse); // 10*log10(1/mse); +infinity when mse == 0

} // namespace ntc
