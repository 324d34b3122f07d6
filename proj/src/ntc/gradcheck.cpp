// SPDX-License-Identifier: Apache-2.0

#include "ntc/gradcheck.hpp"

#include "ntc/conv.hpp"
#include "ntc/fdiff.hpp"
#include "ntc/gdn.hpp"
#include "ntc/loss.hpp"
#include "ntc/optim.hpp"
#include "ntc/pink.hpp"
#include "ntc/rdft.hpp"
#include "ntc/rng.hpp"
#include "ntc/transform.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace ntc {

namespace {

Tensor randn(const Shape& shape, Rng& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

Tensor rand_uniform(const Shape& shape, double lo, double hi, Rng& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Keeps |z| away from the relu/leaky kink so central differences stay valid.
Tensor randn_off_kink(const Shape& shape, Rng& rng, double margin = 1e-3) {
    Tensor t = randn(shape, rng);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::fabs(t[i]) < margin) t[i] = t[i] < 0.0 ? t[i] - margin : t[i] + margin;
    return t;
}

struct Suite {
    std::uint64_t seed;
    std::size_t trials;
    bool inject_fault;
    CheckReport report;

    // fn(rng, trial) returns the trial's worst error.
    template <class Fn>
    void run(const std::string& name, double tolerance, std::size_t count, Fn&& fn) {
        CheckRow row;
        row.name = name;
        row.tolerance = tolerance;
        std::size_t worst_trial = 0;
        Rng rng(seed ^ std::hash<std::string>{}(name));
        for (std::size_t t = 0; t < count; ++t) {
            const double err = fn(rng, t);
            if (err > row.max_err) {
                row.max_err = err;
                worst_trial = t;
            }
        }
        row.pass = row.max_err <= tolerance;
        char buf[96];
        std::snprintf(buf, sizeof buf, "seed=%llu worst_trial=%zu",
                      static_cast<unsigned long long>(seed), worst_trial);
        row.detail = buf;
        if (!row.pass) report.all_pass = false;
        report.rows.push_back(std::move(row));
    }
};

struct ConvCase {
    Tensor input;
    ConvLayerParams params;
    Tensor upstream;
};

ConvCase random_conv_case(Rng& rng, bool transposed) {
    const std::size_t c_in = 1 + rng.below(3);
    const std::size_t c_out = 1 + rng.below(3);
    const std::size_t s = 1 + rng.below(2);          // stride 1 or 2
    const std::size_t k = s + rng.below(3);          // k in [s, s+2]
    const std::size_t h = s * (2 + rng.below(2));    // divisible by s
    const std::size_t w = s * (2 + rng.below(2));
    ConvCase c;
    c.params.stride = s;
    if (!transposed) {
        c.params.kernels = randn({c_out, c_in, k, k}, rng);
        c.params.bias = randn({c_out}, rng);
        c.input = randn({c_in, h, w}, rng);
        c.upstream = randn({c_out, h / s, w / s}, rng);
    } else {
        c.params.kernels = randn({c_in, c_out, k, k}, rng);
        c.params.bias = randn({c_out}, rng);
        c.input = randn({c_in, h, w}, rng);
        c.upstream = randn({c_out, h * s, w * s}, rng);
    }
    return c;
}

double rel_diff(double a, double b) {
    const double denom = std::max({std::fabs(a), std::fabs(b), 1.0});
    return std::fabs(a - b) / denom;
}

GdnParams random_gdn_params(std::size_t channels, bool inverse, Rng& rng, Tensor* beta_out,
                            Tensor* gamma_out) {
    Tensor beta = rand_uniform({channels}, 0.5, 2.0, rng);
    Tensor gamma = rand_uniform({channels, channels}, 0.01, 0.3, rng);
    GdnParams p;
    p.inverse = inverse;
    p.beta = NonNegParam::init(beta, kBetaMin);
    p.gamma = NonNegParam::init(gamma, kGammaMin);
    if (beta_out) *beta_out = std::move(beta);
    if (gamma_out) *gamma_out = std::move(gamma);
    return p;
}

// Tiny model with normalization parameters moved off their clamps so that the
// end-to-end objective is smooth at the finite-difference scale.
Model random_tiny_model(std::uint64_t seed, Rng& rng) {
    TransformConfig cfg;
    cfg.n_filters = 2;
    cfg.kind = Nonlinearity::gdn;
    Model m = build_model(cfg, seed);
    auto re_init = [&](GdnParams& g, bool inverse) {
        const std::size_t c = cfg.n_filters;
        Tensor beta = rand_uniform({c}, 0.8, 1.2, rng);
        Tensor gamma = rand_uniform({c, c}, 0.05, 0.07, rng);
        for (std::size_t i = 0; i < c; ++i) gamma(i, i) += 0.1;
        g.inverse = inverse;
        g.beta = NonNegParam::init(beta, kBetaMin);
        g.gamma = NonNegParam::init(gamma, kGammaMin);
    };
    for (auto& g : m.analysis_gdn) re_init(g, false);
    for (auto& g : m.synthesis_gdn) re_init(g, true);
    return m;
}

} // namespace

CheckReport run_gradcheck(std::uint64_t seed, std::size_t trials, bool inject_fault) {
    Suite s{seed, trials, inject_fault, {}};
    const double fd_tol = 1e-6;

    s.run("conv2d_vjp/input", fd_tol, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, false);
        auto f = [&] { return dot(c.upstream, conv2d_forward(c.input, c.params)); };
        ConvGrads g = conv2d_vjp(c.input, c.params, c.upstream);
        if (s.inject_fault) scale(g.d_input, 1.001);
        return max_rel_err_fd(f, c.input, g.d_input);
    });
    s.run("conv2d_vjp/kernels", fd_tol, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, false);
        auto f = [&] { return dot(c.upstream, conv2d_forward(c.input, c.params)); };
        ConvGrads g = conv2d_vjp(c.input, c.params, c.upstream);
        return max_rel_err_fd(f, c.params.kernels, g.d_kernels);
    });
    s.run("conv2d_vjp/bias", fd_tol, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, false);
        auto f = [&] { return dot(c.upstream, conv2d_forward(c.input, c.params)); };
        ConvGrads g = conv2d_vjp(c.input, c.params, c.upstream);
        return max_rel_err_fd(f, c.params.bias, g.d_bias);
    });
    s.run("upconv2d_vjp/input", fd_tol, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, true);
        auto f = [&] { return dot(c.upstream, upconv2d_forward(c.input, c.params)); };
        ConvGrads g = upconv2d_vjp(c.input, c.params, c.upstream);
        return max_rel_err_fd(f, c.input, g.d_input);
    });
    s.run("upconv2d_vjp/kernels", fd_tol, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, true);
        auto f = [&] { return dot(c.upstream, upconv2d_forward(c.input, c.params)); };
        ConvGrads g = upconv2d_vjp(c.input, c.params, c.upstream);
        return max_rel_err_fd(f, c.params.kernels, g.d_kernels);
    });
    s.run("upconv2d_vjp/bias", fd_tol, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, true);
        auto f = [&] { return dot(c.upstream, upconv2d_forward(c.input, c.params)); };
        ConvGrads g = upconv2d_vjp(c.input, c.params, c.upstream);
        return max_rel_err_fd(f, c.params.bias, g.d_bias);
    });

    s.run("conv2d/adjoint_identity", 1e-10, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, false);
        c.params.bias.fill(0.0);
        const double lhs = dot(c.upstream, conv2d_forward(c.input, c.params));
        ConvGrads g = conv2d_vjp(c.input, c.params, c.upstream);
        return rel_diff(lhs, dot(g.d_input, c.input));
    });
    s.run("upconv2d/adjoint_identity", 1e-10, trials, [&](Rng& rng, std::size_t) {
        // <Conv(x), u> == <x, Upconv(u) - bias part> with shared kernels
        ConvCase c = random_conv_case(rng, false);
        const std::size_t s_ = c.params.stride;
        const std::size_t oh = c.input.extent(1) / s_, ow = c.input.extent(2) / s_;
        Tensor u = randn({c.params.kernels.extent(0), oh, ow}, rng);
        c.params.bias.fill(0.0);
        const double lhs = dot(conv2d_forward(c.input, c.params), u);
        ConvLayerParams up_params{c.params.kernels, Tensor({c.params.kernels.extent(1)}),
                                  c.params.stride};
        const double rhs = dot(c.input, upconv2d_forward(u, up_params));
        return rel_diff(lhs, rhs);
    });
    s.run("conv2d/linearity", 1e-12, trials, [&](Rng& rng, std::size_t) {
        ConvCase c = random_conv_case(rng, false);
        c.params.bias.fill(0.0);
        Tensor x2 = randn(c.input.shape(), rng);
        const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
        Tensor mix(c.input.shape());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * c.input[i] + b * x2[i];
        Tensor lhs = conv2d_forward(mix, c.params);
        Tensor r1 = conv2d_forward(c.input, c.params);
        Tensor r2 = conv2d_forward(x2, c.params);
        double worst = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i)
            worst = std::max(worst, rel_diff(lhs[i], a * r1[i] + b * r2[i]));
        return worst;
    });
    s.run("upconv2d/transpose_of_transpose", 1e-12, trials, [&](Rng& rng, std::size_t) {
        // d_input of upconv == conv2d_forward of upstream with zero bias
        ConvCase c = random_conv_case(rng, true);
        ConvGrads g = upconv2d_vjp(c.input, c.params, c.upstream);
        ConvLayerParams conv_params{c.params.kernels, Tensor({c.params.kernels.extent(0)}),
                                    c.params.stride};
        Tensor direct = conv2d_forward(c.upstream, conv_params);
        return max_abs_diff(g.d_input, direct);
    });

    for (Activation kind : {Activation::identity, Activation::relu, Activation::leaky_relu,
                            Activation::softplus, Activation::tanh}) {
        const char* names[] = {"identity", "relu", "leaky_relu", "softplus", "tanh"};
        s.run(std::string("activation_vjp/") + names[static_cast<int>(kind)], fd_tol, trials,
              [&, kind](Rng& rng, std::size_t) {
                  Tensor z = randn_off_kink({3, 4, 4}, rng);
                  Tensor up = randn(z.shape(), rng);
                  auto f = [&] { return dot(up, activation(z, kind)); };
                  Tensor g = activation_vjp(z, up, kind);
                  return max_rel_err_fd(f, z, g);
              });
    }

    for (bool inverse : {false, true}) {
        const std::string mode = inverse ? "igdn" : "gdn";
        s.run(mode + "_vjp/z", fd_tol, trials, [&, inverse](Rng& rng, std::size_t) {
            GdnParams p = random_gdn_params(3, inverse, rng, nullptr, nullptr);
            Tensor z = randn({3, 2, 2}, rng);
            Tensor up = randn(z.shape(), rng);
            auto f = [&] { return dot(up, gdn_forward(z, p)); };
            GdnGrads g = gdn_vjp(z, p, up);
            return max_rel_err_fd(f, z, g.d_z);
        });
        s.run(mode + "_vjp/beta", fd_tol, trials, [&, inverse](Rng& rng, std::size_t) {
            Tensor beta, gamma;
            GdnParams p = random_gdn_params(3, inverse, rng, &beta, &gamma);
            Tensor z = randn({3, 2, 2}, rng);
            Tensor up = randn(z.shape(), rng);
            GdnGrads g = gdn_vjp(z, p, up);
            auto f = [&] {
                GdnParams q;
                q.inverse = inverse;
                q.beta = NonNegParam::init(beta, kBetaMin);
                q.gamma = NonNegParam::init(gamma, kGammaMin);
                return dot(up, gdn_forward(z, q));
            };
            return max_rel_err_fd(f, beta, g.d_beta);
        });
        s.run(mode + "_vjp/gamma", fd_tol, trials, [&, inverse](Rng& rng, std::size_t) {
            Tensor beta, gamma;
            GdnParams p = random_gdn_params(3, inverse, rng, &beta, &gamma);
            Tensor z = randn({3, 2, 2}, rng);
            Tensor up = randn(z.shape(), rng);
            GdnGrads g = gdn_vjp(z, p, up);
            auto f = [&] {
                GdnParams q;
                q.inverse = inverse;
                q.beta = NonNegParam::init(beta, kBetaMin);
                q.gamma = NonNegParam::init(gamma, kGammaMin);
                return dot(up, gdn_forward(z, q));
            };
            return max_rel_err_fd(f, gamma, g.d_gamma);
        });
    }

    s.run("nonneg_vjp/off_clamp", fd_tol, trials, [&](Rng& rng, std::size_t) {
        // Below the clamp the gated pseudo-gradient intentionally differs from
        // the (zero) true derivative, so finite differences only apply above.
        NonNegParam p;
        p.min_value = kBetaMin;
        p.epsilon = kGdnEpsilon;
        p.nu = rand_uniform({8}, p.bound() + 0.01, 2.0, rng);
        Tensor up = randn({8}, rng);
        auto f = [&] { return dot(up, p.materialize()); };
        Tensor g = p.vjp(up);
        return max_rel_err_fd(f, p.nu, g);
    });

    s.run("likelihood_vjp/y_mu_sigma", fd_tol, trials, [&](Rng& rng, std::size_t) {
        FactorizedDensity d;
        d.mu = randn({3}, rng);
        d.sigma = randn({3}, rng);
        Tensor y({3, 5});
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < 5; ++i)
                y(c, i) = d.mu[c] + d.scale(c) * 2.0 * rng.normal();
        Tensor up = randn(y.shape(), rng);
        LikelihoodGrads g = likelihood_vjp(y, d, up);
        auto f = [&] { return dot(up, likelihood(y, d)); };
        double err = max_rel_err_fd(f, y, g.d_y);
        err = std::max(err, max_rel_err_fd(f, d.mu, g.d_mu));
        err = std::max(err, max_rel_err_fd(f, d.sigma, g.d_sigma));
        return err;
    });

    s.run("rd_loss/end_to_end", 1e-5, trials, [&](Rng& rng, std::size_t t) {
        Model m = random_tiny_model(seed * 1000003ull + t, rng);
        Tensor x = rand_uniform({3, 16, 16}, 0.0, 1.0, rng);
        const Tensor noise = sample_unit_noise({2, 1, 1}, rng);
        const double lambda = 0.25;
        LossResult base = rd_loss_with_noise(x, m, lambda, noise);
        auto f = [&] { return rd_loss_with_noise(x, m, lambda, noise).loss.total; };
        double err = 0.0;
        std::vector<ParamRef> params = model_parameters(m);
        std::vector<ParamRef> grads = grad_parameters(base.grads);
        for (std::size_t i = 0; i < params.size(); ++i)
            err = std::max(err, max_rel_err_fd(f, *params[i].tensor, *grads[i].tensor));
        return err;
    });

    s.run("rdft/orthogonality", 1e-12, 1, [&](Rng&, std::size_t) {
        double worst = 0.0;
        for (std::size_t n : {1u, 2u, 4u, 5u, 8u, 9u, 16u, 25u}) {
            const RdftBasis b = RdftBasis::make(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < n; ++t)
                        acc += b.matrix(i, t) * b.matrix(j, t);
                    worst = std::max(worst, std::fabs(acc - (i == j ? 1.0 : 0.0)));
                }
        }
        return worst;
    });

    s.run("reparam/effective_step_identity", 1e-12, std::max<std::size_t>(trials * 10, 1000),
          [&](Rng& rng, std::size_t) {
              const double beta = rng.uniform(0.1, 10.0);
              const double grad = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 3.0);
              const double rho = rng.uniform(0.005, 0.1);
              NonNegParam p;
              p.min_value = 0.0;
              p.epsilon = 0.0; // pure beta = nu^2 case
              p.nu = Tensor({1}, {std::sqrt(beta)});
              const double dnu = p.vjp(Tensor({1}, {grad}))[0];
              const double u = rho * dnu;
              // factored (nu - u)^2 - nu^2 avoids the cancellation of the
              // squared difference
              const double delta_impl = u * (u - 2.0 * p.nu[0]);
              const double expected = -4.0 * beta * rho * (1.0 - rho * grad) * grad;
              return std::fabs(delta_impl - expected) / std::fabs(expected);
          });

    s.run("sadam/identity_basis_equals_adam", 1e-12, 1, [&](Rng& rng, std::size_t) {
        AdamConfig cfg;
        cfg.rho = 1e-4;
        Tensor pa = randn({2, 3, 1, 1}, rng);
        Tensor pb = pa;
        AdamState adam = AdamState::make(pa.shape(), cfg);
        SadamState sadam = SadamState::make(pb.shape(), cfg);
        const std::size_t steps = std::max<std::size_t>(trials * 10, 1000);
        double worst = 0.0;
        for (std::size_t t = 0; t < steps; ++t) {
            Tensor g = randn(pa.shape(), rng);
            adam_step(adam, pa, g);
            sadam_step(sadam, pb, g);
            worst = std::max(worst, max_abs_diff(pa, pb));
        }
        return worst;
    });

    s.run("sadam/dual_path_spectral", 1e-12, 1, [&](Rng& rng, std::size_t) {
        AdamConfig cfg;
        cfg.rho = 1e-4;
        Tensor spatial = randn({2, 2, 5, 5}, rng);
        const RdftBasis basis = RdftBasis::make(5);
        Tensor spectral = rdft2_apply(spatial, basis, false);
        SadamState sadam = SadamState::make(spatial.shape(), cfg);
        AdamState adam = AdamState::make(spectral.shape(), cfg);
        double worst = 0.0;
        for (std::size_t t = 0; t < 100; ++t) {
            Tensor g = randn(spatial.shape(), rng);
            sadam_step(sadam, spatial, g);
            Tensor gs = rdft2_apply(g, basis, false);
            adam_step(adam, spectral, gs);
            worst = std::max(worst, max_abs_diff(spatial, rdft2_apply(spectral, basis, true)));
        }
        return worst;
    });

    s.run("sadam/dc_gradient_first_step", 1e-12, 1, [&](Rng& rng, std::size_t) {
        AdamConfig cfg;
        cfg.rho = 1e-4;
        Tensor h({1, 1, 1, 4});
        SadamState st = SadamState::make(h.shape(), cfg);
        const double c = 0.5 + rng.uniform();
        Tensor g = Tensor::full(h.shape(), c);
        sadam_step(st, h, g);
        // constant gradient excites only the DC coefficient:
        // delta = -rho / sqrt(n) per element
        const double expected = -cfg.rho / 2.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) worst = std::max(worst, std::fabs(h[i] - expected));
        return worst;
    });

    return s.report;
}

void print_report(const CheckReport& report, std::ostream& out) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-36s %12s %12s   %s\n", "check", "max_err", "tolerance",
                  "status");
    out << buf;
    for (const CheckRow& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%-36s %12.3e %12.1e   %s\n", row.name.c_str(),
                      row.max_err, row.tolerance, row.pass ? "ok" : "FAIL");
        out << buf;
        if (!row.pass) out << "    reproduce: " << row.detail << "\n";
    }
    out << (report.all_pass ? "all checks passed\n" : "CHECKS FAILED\n");
}

} // namespace ntc
