// SPDX-License-Identifier: Apache-2.0

#include "ntc/entropy.hpp"

#include "ntc/activation.hpp"
#include "ntc/error.hpp"

#include <cmath>

namespace ntc {

Tensor quantize(const Tensor& y, QuantizerMode mode, Rng* rng) {
    Tensor out(y.shape());
    if (mode == QuantizerMode::train) {
        require(rng != nullptr, "quantize: train mode needs a generator");
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + (rng->uniform() - 0.5);
    } else {
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::round(y[i]);
    }
    return out;
}

Tensor sample_unit_noise(const Shape& shape, Rng& rng) {
    Tensor out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform() - 0.5;
    return out;
}

FactorizedDensity FactorizedDensity::make(std::size_t channels) {
    FactorizedDensity d;
    d.mu = Tensor({channels});
    // softplus(sigma) + kScaleFloor == 1
    const double raw = std::log(std::expm1(1.0 - kScaleFloor));
    d.sigma = Tensor::full({channels}, raw);
    return d;
}

double FactorizedDensity::scale(std::size_t c) const {
    return softplus(sigma[c]) + kScaleFloor;
}

namespace {

void check_leading(const Tensor& y, const FactorizedDensity& d, const char* what) {
    require(y.rank() >= 1 && y.extent(0) == d.channels(),
            std::string(what) + ": leading extent must equal channel count");
}

} // namespace

Tensor likelihood(const Tensor& y_tilde, const FactorizedDensity& density) {
    check_leading(y_tilde, density, "likelihood");
    const std::size_t c = density.channels();
    const std::size_t positions = y_tilde.size() / c;
    Tensor out(y_tilde.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double mu = density.mu[ch];
        const double s = density.scale(ch);
        for (std::size_t pos = 0; pos < positions; ++pos) {
            const std::size_t e = ch * positions + pos;
            const double hi = logistic((y_tilde[e] + 0.5 - mu) / s);
            const double lo = logistic((y_tilde[e] - 0.5 - mu) / s);
            const double p = hi - lo;
            out[e] = p > kLikelihoodFloor ? p : kLikelihoodFloor;
        }
    }
    return out;
}

double rate_bits(const Tensor& likelihoods) {
    // log2 keeps power-of-two likelihoods exact (p = 1/2 is exactly one bit)
    double bits = 0.0;
    for (std::size_t i = 0; i < likelihoods.size(); ++i) bits -= std::log2(likelihoods[i]);
    return bits;
}

LikelihoodGrads likelihood_vjp(const Tensor& y_tilde, const FactorizedDensity& density,
                               const Tensor& upstream) {
    check_leading(y_tilde, density, "likelihood_vjp");
    require(upstream.same_shape(y_tilde), "likelihood_vjp: upstream shape mismatch");
    const std::size_t c = density.channels();
    const std::size_t positions = y_tilde.size() / c;

    LikelihoodGrads g;
    g.d_y = Tensor(y_tilde.shape());
    g.d_mu = Tensor({c});
    g.d_sigma = Tensor({c});

    for (std::size_t ch = 0; ch < c; ++ch) {
        const double mu = density.mu[ch];
        const double s = density.scale(ch);
        const double ds_dsigma = logistic(density.sigma[ch]); // softplus'
        double acc_mu = 0.0, acc_s = 0.0;
        for (std::size_t pos = 0; pos < positions; ++pos) {
            const std::size_t e = ch * positions + pos;
            const double hi_arg = (y_tilde[e] + 0.5 - mu) / s;
            const double lo_arg = (y_tilde[e] - 0.5 - mu) / s;
            const double hi = logistic(hi_arg);
            const double lo = logistic(lo_arg);
            if (hi - lo <= kLikelihoodFloor) continue; // clamp active: zero gradient
            const double dhi = hi * (1.0 - hi);
            const double dlo = lo * (1.0 - lo);
            const double u = upstream[e];
            g.d_y[e] = u * (dhi - dlo) / s;
            acc_mu -= u * (dhi - dlo) / s;
            acc_s -= u * (dhi * hi_arg - dlo * lo_arg) / s;
        }
        g.d_mu[ch] = acc_mu;
        g.d_sigma[ch] = acc_s * ds_dsigma;
    }
    return g;
}

} // namespace ntc
