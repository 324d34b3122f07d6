// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/activation.hpp"
#include "ntc/conv.hpp"
#include "ntc/entropy.hpp"
#include "ntc/gdn.hpp"
#include "ntc/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ntc {

enum class Nonlinearity { gdn, relu, leaky_relu, softplus, tanh, linear };

Nonlinearity nonlinearity_from_name(std::string_view name); // throws ConfigError
std::string_view nonlinearity_name(Nonlinearity kind);
inline constexpr std::array<Nonlinearity, 6> kAllNonlinearities = {
    Nonlinearity::linear,   Nonlinearity::tanh, Nonlinearity::softplus,
    Nonlinearity::relu, Nonlinearity::leaky_relu, Nonlinearity::gdn};

// Three analysis layers (kernels 9,5,5 / strides 4,2,2) mirrored by three
// synthesis layers (kernels 5,5,9 / upsampling 2,2,4), two nonlinear layers
// sandwiched on each side, final synthesis layer mapping back to 3 channels.
struct TransformConfig {
    std::size_t n_filters = 8;
    Nonlinearity kind = Nonlinearity::gdn;

    static constexpr std::array<std::size_t, 3> kAnalysisKernels = {9, 5, 5};
    static constexpr std::array<std::size_t, 3> kAnalysisStrides = {4, 2, 2};
    static constexpr std::size_t kImageChannels = 3;
    static constexpr std::size_t kTotalDownsampling = 16;
};

struct Model {
    TransformConfig config;
    std::array<ConvLayerParams, 3> analysis;
    std::array<GdnParams, 2> analysis_gdn; // populated only for kind == gdn
    std::array<ConvLayerParams, 3> synthesis;
    std::array<GdnParams, 2> synthesis_gdn; // inverse (IGDN)
    FactorizedDensity density;
};

// Kernels ~ N(0, 1/fan_in), zero biases, default GDN, unit-scale density.
// Deterministic per seed.
Model build_model(const TransformConfig& config, std::uint64_t seed);

// Intermediates retained by a forward pass for the exact backward pass.
struct TransformTrace {
    std::array<Tensor, 3> conv_in;  // input to each conv layer
    std::array<Tensor, 2> conv_out; // pre-nonlinearity responses
};

// Gradients for every trainable tensor; nonneg parameters are reported in
// nu-space (chained through the gated reparameterization gradient).
struct LayerGrads {
    Tensor kernels;
    Tensor bias;
};
struct GdnNuGrads {
    Tensor beta_nu;
    Tensor gamma_nu;
};
struct ModelGrads {
    std::array<LayerGrads, 3> analysis;
    std::array<GdnNuGrads, 2> analysis_gdn;
    std::array<LayerGrads, 3> synthesis;
    std::array<GdnNuGrads, 2> synthesis_gdn;
    Tensor d_mu;
    Tensor d_sigma;

    static ModelGrads zeros_like(const Model& m);
    void accumulate(const ModelGrads& other, double scale);
    void scale_all(double factor);
};

Tensor analysis_forward(const Tensor& x, const Model& m, TransformTrace* trace = nullptr);
Tensor synthesis_forward(const Tensor& y_hat, const Model& m, TransformTrace* trace = nullptr);

// Returns d_input; parameter gradients are accumulated into `grads`.
Tensor analysis_backward(const Tensor& d_y, const Model& m, const TransformTrace& trace,
                         ModelGrads& grads);
Tensor synthesis_backward(const Tensor& d_xhat, const Model& m, const TransformTrace& trace,
                          ModelGrads& grads);

// Uniform enumeration of trainable tensors in a fixed order; `is_conv_kernel`
// marks the tensors eligible for the spectral optimizer. The grads overload
// yields matching entries in the same order.
struct ParamRef {
    std::string name;
    Tensor* tensor;
    bool is_conv_kernel;
};
std::vector<ParamRef> model_parameters(Model& m);
std::vector<ParamRef> grad_parameters(ModelGrads& g);

} // namespace ntc
