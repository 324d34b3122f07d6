// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

#include <string_view>

namespace ntc {

enum class Activation { identity, relu, leaky_relu, softplus, tanh };

// Slope below zero for leaky_relu.
inline constexpr double kLeakyReluSlope = 0.2;

Tensor activation(const Tensor& z, Activation kind);
Tensor activation_vjp(const Tensor& z, const Tensor& upstream, Activation kind);

// Numerically stable scalar helpers, shared with the entropy model.
double softplus(double x);
double logistic(double x);

} // namespace ntc
