// SPDX-License-Identifier: Apache-2.0

#include "ntc/loss.hpp"

#include "ntc/error.hpp"

#include <cmath>
#include <limits>

namespace ntc {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

} // namespace

LossResult rd_loss_with_noise(const Tensor& x, const Model& m, double lambda,
                              const Tensor& noise) {
    require(lambda >= 0.0, "rd_loss: lambda must be non-negative");
    const double pixels = static_cast<double>(x.extent(1) * x.extent(2));

    TransformTrace analysis_trace;
    const Tensor y = analysis_forward(x, m, &analysis_trace);
    require(noise.same_shape(y), "rd_loss: noise shape must match the latent");

    Tensor y_tilde(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) y_tilde[i] = y[i] + noise[i];

    const Tensor p = likelihood(y_tilde, m.density);
    const double bits = rate_bits(p);
    const double rate = bits / pixels;

    TransformTrace synthesis_trace;
    const Tensor x_hat = synthesis_forward(y_tilde, m, &synthesis_trace);

    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_hat[i];
        sq += d * d;
    }
    const double mse = sq / static_cast<double>(x.size());

    LossResult res;
    res.loss.rate_bpp = rate;
    res.loss.distortion = mse;
    res.loss.total = rate + lambda * mse;
    res.grads = ModelGrads::zeros_like(m);

    // Rate path: dL/dp_e = -1 / (p_e * ln2 * pixels).
    Tensor up_p(p.shape());
    for (std::size_t i = 0; i < p.size(); ++i) up_p[i] = -1.0 / (p[i] * kLn2 * pixels);
    LikelihoodGrads lg = likelihood_vjp(y_tilde, m.density, up_p);
    add_scaled(res.grads.d_mu, lg.d_mu, 1.0);
    add_scaled(res.grads.d_sigma, lg.d_sigma, 1.0);

    // Distortion path: dL/dx_hat = lambda * 2 (x_hat - x) / count.
    Tensor up_xhat(x_hat.shape());
    const double dscale = lambda * 2.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) up_xhat[i] = dscale * (x_hat[i] - x[i]);
    Tensor d_ytilde = synthesis_backward(up_xhat, m, synthesis_trace, res.grads);

    // Additive-noise relaxation: d y_tilde / d y is the identity.
    add_scaled(d_ytilde, lg.d_y, 1.0);
    analysis_backward(d_ytilde, m, analysis_trace, res.grads);
    return res;
}

LossResult rd_loss(const Tensor& x, const Model& m, double lambda, Rng& rng) {
    const std::size_t n = m.config.n_filters;
    const std::size_t lh = x.extent(1) / TransformConfig::kTotalDownsampling;
    const std::size_t lw = x.extent(2) / TransformConfig::kTotalDownsampling;
    const Tensor noise = sample_unit_noise({n, lh, lw}, rng);
    return rd_loss_with_noise(x, m, lambda, noise);
}

EvalMetrics rd_metrics_eval(const Tensor& x, const Model& m) {
    const Tensor y = analysis_forward(x, m);
    const Tensor y_hat = quantize(y, QuantizerMode::eval, nullptr);
    const Tensor p = likelihood(y_hat, m.density);
    const Tensor x_hat = synthesis_forward(y_hat, m);

    EvalMetrics out;
    out.bits = rate_bits(p);
    out.bpp = out.bits / static_cast<double>(x.extent(1) * x.extent(2));
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_hat[i];
        sq += d * d;
    }
    out.mse = sq / static_cast<double>(x.size());
    return out;
}

double psnr_db(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

} // namespace ntc
