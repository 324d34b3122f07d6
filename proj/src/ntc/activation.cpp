// SPDX-License-Identifier: Apache-2.0

#include "ntc/activation.hpp"

#include "ntc/error.hpp"

#include <cmath>

namespace ntc {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor activation(const Tensor& z, Activation kind) {
    Tensor out(z.shape());
    switch (kind) {
    case Activation::identity:
        out = z;
        break;
    case Activation::relu:
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
        break;
    case Activation::leaky_relu:
        for (std::size_t i = 0; i < z.size(); ++i)
            out[i] = z[i] > 0.0 ? z[i] : kLeakyReluSlope * z[i];
        break;
    case Activation::softplus:
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = softplus(z[i]);
        break;
    case Activation::tanh:
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::tanh(z[i]);
        break;
    default:
        throw ConfigError("activation: unknown kind");
    }
    return out;
}

Tensor activation_vjp(const Tensor& z, const Tensor& upstream, Activation kind) {
    require(z.same_shape(upstream), "activation_vjp: upstream shape mismatch");
    Tensor out(z.shape());
    switch (kind) {
    case Activation::identity:
        out = upstream;
        break;
    case Activation::relu:
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? upstream[i] : 0.0;
        break;
    case Activation::leaky_relu:
        for (std::size_t i = 0; i < z.size(); ++i)
            out[i] = upstream[i] * (z[i] > 0.0 ? 1.0 : kLeakyReluSlope);
        break;
    case Activation::softplus:
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = upstream[i] * logistic(z[i]);
        break;
    case Activation::tanh:
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double t = std::tanh(z[i]);
            out[i] = upstream[i] * (1.0 - t * t);
        }
        break;
    default:
        throw ConfigError("activation_vjp: unknown kind");
    }
    return out;
}

} // namespace ntc
