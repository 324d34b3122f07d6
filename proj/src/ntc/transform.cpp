// SPDX-License-Identifier: Apache-2.0

#include "ntc/transform.hpp"

#include "ntc/error.hpp"

#include <cmath>

namespace ntc {

Nonlinearity nonlinearity_from_name(std::string_view name) {
    if (name == "gdn") return Nonlinearity::gdn;
    if (name == "relu") return Nonlinearity::relu;
    if (name == "leaky_relu") return Nonlinearity::leaky_relu;
    if (name == "softplus") return Nonlinearity::softplus;
    if (name == "tanh") return Nonlinearity::tanh;
    if (name == "linear") return Nonlinearity::linear;
    throw ConfigError("unknown nonlinearity: " + std::string(name));
}

std::string_view nonlinearity_name(Nonlinearity kind) {
    switch (kind) {
    case Nonlinearity::gdn: return "gdn";
    case Nonlinearity::relu: return "relu";
    case Nonlinearity::leaky_relu: return "leaky_relu";
    case Nonlinearity::softplus: return "softplus";
    case Nonlinearity::tanh: return "tanh";
    case Nonlinearity::linear: return "linear";
    }
    return "?";
}

namespace {

Activation plain_activation(Nonlinearity kind) {
    switch (kind) {
    case Nonlinearity::relu: return Activation::relu;
    case Nonlinearity::leaky_relu: return Activation::leaky_relu;
    case Nonlinearity::softplus: return Activation::softplus;
    case Nonlinearity::tanh: return Activation::tanh;
    case Nonlinearity::linear: return Activation::identity;
    case Nonlinearity::gdn: break;
    }
    throw ConfigError("plain_activation: gdn handled separately");
}

Tensor random_kernels(const Shape& shape, Rng& rng) {
    // fan_in counts the second axis and the spatial support
    const double fan_in = static_cast<double>(shape[1] * shape[2] * shape[3]);
    const double stddev = 1.0 / std::sqrt(fan_in);
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = stddev * rng.normal();
    return t;
}

} // namespace

Model build_model(const TransformConfig& config, std::uint64_t seed) {
    require(config.n_filters >= 1, "build_model: n_filters must be >= 1");
    Rng rng(seed);
    Model m;
    m.config = config;
    const std::size_t n = config.n_filters;
    const auto& ks = TransformConfig::kAnalysisKernels;
    const auto& ss = TransformConfig::kAnalysisStrides;

    const std::array<std::size_t, 4> widths = {TransformConfig::kImageChannels, n, n, n};
    for (std::size_t l = 0; l < 3; ++l) {
        m.analysis[l].kernels = random_kernels({widths[l + 1], widths[l], ks[l], ks[l]}, rng);
        m.analysis[l].bias = Tensor({widths[l + 1]});
        m.analysis[l].stride = ss[l];
    }
    // synthesis mirrors the analysis geometry in reverse; upconv kernels are
    // [in, out, k, k]
    for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t mirrored = 2 - l;
        m.synthesis[l].kernels =
            random_kernels({widths[mirrored + 1], widths[mirrored], ks[mirrored], ks[mirrored]},
                           rng);
        m.synthesis[l].bias = Tensor({widths[mirrored]});
        m.synthesis[l].stride = ss[mirrored];
    }
    if (config.kind == Nonlinearity::gdn) {
        for (auto& g : m.analysis_gdn) g = GdnParams::make_default(n, /*inverse=*/false);
        for (auto& g : m.synthesis_gdn) g = GdnParams::make_default(n, /*inverse=*/true);
    }
    m.density = FactorizedDensity::make(n);
    return m;
}

ModelGrads ModelGrads::zeros_like(const Model& m) {
    ModelGrads g;
    for (std::size_t l = 0; l < 3; ++l) {
        g.analysis[l] = {Tensor(m.analysis[l].kernels.shape()), Tensor(m.analysis[l].bias.shape())};
        g.synthesis[l] = {Tensor(m.synthesis[l].kernels.shape()),
                          Tensor(m.synthesis[l].bias.shape())};
    }
    if (m.config.kind == Nonlinearity::gdn) {
        for (std::size_t l = 0; l < 2; ++l) {
            g.analysis_gdn[l] = {Tensor(m.analysis_gdn[l].beta.nu.shape()),
                                 Tensor(m.analysis_gdn[l].gamma.nu.shape())};
            g.synthesis_gdn[l] = {Tensor(m.synthesis_gdn[l].beta.nu.shape()),
                                  Tensor(m.synthesis_gdn[l].gamma.nu.shape())};
        }
    }
    g.d_mu = Tensor(m.density.mu.shape());
    g.d_sigma = Tensor(m.density.sigma.shape());
    return g;
}

namespace {

template <class Fn>
void for_each_grad_pair(ModelGrads& a, const ModelGrads& b, Fn&& fn) {
    for (std::size_t l = 0; l < 3; ++l) {
        fn(a.analysis[l].kernels, b.analysis[l].kernels);
        fn(a.analysis[l].bias, b.analysis[l].bias);
        fn(a.synthesis[l].kernels, b.synthesis[l].kernels);
        fn(a.synthesis[l].bias, b.synthesis[l].bias);
    }
    for (std::size_t l = 0; l < 2; ++l) {
        fn(a.analysis_gdn[l].beta_nu, b.analysis_gdn[l].beta_nu);
        fn(a.analysis_gdn[l].gamma_nu, b.analysis_gdn[l].gamma_nu);
        fn(a.synthesis_gdn[l].beta_nu, b.synthesis_gdn[l].beta_nu);
        fn(a.synthesis_gdn[l].gamma_nu, b.synthesis_gdn[l].gamma_nu);
    }
    fn(a.d_mu, b.d_mu);
    fn(a.d_sigma, b.d_sigma);
}

} // namespace

void ModelGrads::accumulate(const ModelGrads& other, double s) {
    for_each_grad_pair(*this, other, [s](Tensor& dst, const Tensor& src) {
        if (src.size() > 0) add_scaled(dst, src, s);
    });
}

void ModelGrads::scale_all(double factor) {
    for_each_grad_pair(*this, *this, [factor](Tensor& dst, const Tensor&) {
        if (dst.size() > 0) scale(dst, factor);
    });
}

Tensor analysis_forward(const Tensor& x, const Model& m, TransformTrace* trace) {
    require(x.rank() == 3 && x.extent(0) == TransformConfig::kImageChannels,
            "analysis_forward: input must be [3,H,W]");
    require(x.extent(1) % TransformConfig::kTotalDownsampling == 0 &&
                x.extent(2) % TransformConfig::kTotalDownsampling == 0,
            "analysis_forward: spatial extents must be divisible by 16");

    Tensor cur = x;
    for (std::size_t l = 0; l < 3; ++l) {
        if (trace) trace->conv_in[l] = cur;
        Tensor z = conv2d_forward(cur, m.analysis[l]);
        if (l < 2) {
            if (trace) trace->conv_out[l] = z;
            cur = m.config.kind == Nonlinearity::gdn
                      ? gdn_forward(z, m.analysis_gdn[l])
                      : activation(z, plain_activation(m.config.kind));
        } else {
            cur = std::move(z);
        }
    }
    return cur;
}

Tensor synthesis_forward(const Tensor& y_hat, const Model& m, TransformTrace* trace) {
    require(y_hat.rank() == 3 && y_hat.extent(0) == m.config.n_filters,
            "synthesis_forward: input must be [N,h,w]");
    Tensor cur = y_hat;
    for (std::size_t l = 0; l < 3; ++l) {
        if (trace) trace->conv_in[l] = cur;
        Tensor z = upconv2d_forward(cur, m.synthesis[l]);
        if (l < 2) {
            if (trace) trace->conv_out[l] = z;
            cur = m.config.kind == Nonlinearity::gdn
                      ? gdn_forward(z, m.synthesis_gdn[l])
                      : activation(z, plain_activation(m.config.kind));
        } else {
            cur = std::move(z);
        }
    }
    return cur;
}

namespace {

// Shared reverse pass over conv -> nl -> conv -> nl -> conv.
template <class VjpFn>
Tensor backward_impl(const Tensor& d_out, const std::array<ConvLayerParams, 3>& layers,
                     const std::array<GdnParams, 2>& gdns, Nonlinearity kind,
                     const TransformTrace& trace, std::array<LayerGrads, 3>& layer_grads,
                     std::array<GdnNuGrads, 2>& gdn_grads, VjpFn&& conv_vjp) {
    Tensor d_cur = d_out;
    for (std::size_t li = 3; li-- > 0;) {
        ConvGrads cg = conv_vjp(trace.conv_in[li], layers[li], d_cur);
        add_scaled(layer_grads[li].kernels, cg.d_kernels, 1.0);
        add_scaled(layer_grads[li].bias, cg.d_bias, 1.0);
        d_cur = std::move(cg.d_input);
        if (li > 0) {
            const std::size_t nl = li - 1;
            if (kind == Nonlinearity::gdn) {
                GdnGrads gg = gdn_vjp(trace.conv_out[nl], gdns[nl], d_cur);
                add_scaled(gdn_grads[nl].beta_nu, gdns[nl].beta.vjp(gg.d_beta), 1.0);
                add_scaled(gdn_grads[nl].gamma_nu, gdns[nl].gamma.vjp(gg.d_gamma), 1.0);
                d_cur = std::move(gg.d_z);
            } else {
                d_cur = activation_vjp(trace.conv_out[nl], d_cur, plain_activation(kind));
            }
        }
    }
    return d_cur;
}

} // namespace

Tensor analysis_backward(const Tensor& d_y, const Model& m, const TransformTrace& trace,
                         ModelGrads& grads) {
    return backward_impl(d_y, m.analysis, m.analysis_gdn, m.config.kind, trace, grads.analysis,
                         grads.analysis_gdn,
                         [](const Tensor& in, const ConvLayerParams& p, const Tensor& up) {
                             return conv2d_vjp(in, p, up);
                         });
}

Tensor synthesis_backward(const Tensor& d_xhat, const Model& m, const TransformTrace& trace,
                          ModelGrads& grads) {
    return backward_impl(d_xhat, m.synthesis, m.synthesis_gdn, m.config.kind, trace,
                         grads.synthesis, grads.synthesis_gdn,
                         [](const Tensor& in, const ConvLayerParams& p, const Tensor& up) {
                             return upconv2d_vjp(in, p, up);
                         });
}

std::vector<ParamRef> model_parameters(Model& m) {
    std::vector<ParamRef> out;
    const bool gdn = m.config.kind == Nonlinearity::gdn;
    for (std::size_t l = 0; l < 3; ++l) {
        out.push_back({"analysis." + std::to_string(l) + ".kernels", &m.analysis[l].kernels, true});
        out.push_back({"analysis." + std::to_string(l) + ".bias", &m.analysis[l].bias, false});
    }
    if (gdn)
        for (std::size_t l = 0; l < 2; ++l) {
            out.push_back({"analysis.gdn." + std::to_string(l) + ".beta_nu",
                           &m.analysis_gdn[l].beta.nu, false});
            out.push_back({"analysis.gdn." + std::to_string(l) + ".gamma_nu",
                           &m.analysis_gdn[l].gamma.nu, false});
        }
    for (std::size_t l = 0; l < 3; ++l) {
        out.push_back(
            {"synthesis." + std::to_string(l) + ".kernels", &m.synthesis[l].kernels, true});
        out.push_back({"synthesis." + std::to_string(l) + ".bias", &m.synthesis[l].bias, false});
    }
    if (gdn)
        for (std::size_t l = 0; l < 2; ++l) {
            out.push_back({"synthesis.gdn." + std::to_string(l) + ".beta_nu",
                           &m.synthesis_gdn[l].beta.nu, false});
            out.push_back({"synthesis.gdn." + std::to_string(l) + ".gamma_nu",
                           &m.synthesis_gdn[l].gamma.nu, false});
        }
    out.push_back({"density.mu", &m.density.mu, false});
    out.push_back({"density.sigma", &m.density.sigma, false});
    return out;
}

std::vector<ParamRef> grad_parameters(ModelGrads& g) {
    std::vector<ParamRef> out;
    const bool gdn = g.analysis_gdn[0].beta_nu.size() > 0;
    for (std::size_t l = 0; l < 3; ++l) {
        out.push_back({"analysis." + std::to_string(l) + ".kernels", &g.analysis[l].kernels, true});
        out.push_back({"analysis." + std::to_string(l) + ".bias", &g.analysis[l].bias, false});
    }
    if (gdn)
        for (std::size_t l = 0; l < 2; ++l) {
            out.push_back({"analysis.gdn." + std::to_string(l) + ".beta_nu",
                           &g.analysis_gdn[l].beta_nu, false});
            out.push_back({"analysis.gdn." + std::to_string(l) + ".gamma_nu",
                           &g.analysis_gdn[l].gamma_nu, false});
        }
    for (std::size_t l = 0; l < 3; ++l) {
        out.push_back(
            {"synthesis." + std::to_string(l) + ".kernels", &g.synthesis[l].kernels, true});
        out.push_back({"synthesis." + std::to_string(l) + ".bias", &g.synthesis[l].bias, false});
    }
    if (gdn)
        for (std::size_t l = 0; l < 2; ++l) {
            out.push_back({"synthesis.gdn." + std::to_string(l) + ".beta_nu",
                           &g.synthesis_gdn[l].beta_nu, false});
            out.push_back({"synthesis.gdn." + std::to_string(l) + ".gamma_nu",
                           &g.synthesis_gdn[l].gamma_nu, false});
        }
    out.push_back({"density.mu", &g.d_mu, false});
    out.push_back({"density.sigma", &g.d_sigma, false});
    return out;
}

} // namespace ntc
