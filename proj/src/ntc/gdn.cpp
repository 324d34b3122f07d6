// SPDX-License-Identifier: Apache-2.0

#include "ntc/gdn.hpp"

#include "ntc/error.hpp"

#include <cmath>

namespace ntc {

double NonNegParam::bound() const { return std::sqrt(min_value + epsilon * epsilon); }

NonNegParam NonNegParam::init(const Tensor& value, double min_value, double epsilon) {
    NonNegParam p;
    p.min_value = min_value;
    p.epsilon = epsilon;
    p.nu = Tensor(value.shape());
    for (std::size_t i = 0; i < value.size(); ++i) {
        require(value[i] >= min_value, "nonneg_init: value below minimum");
        p.nu[i] = std::sqrt(value[i] + epsilon * epsilon);
    }
    return p;
}

Tensor NonNegParam::materialize() const {
    const double c = bound();
    const double eps2 = epsilon * epsilon;
    Tensor out(nu.shape());
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double m = nu[i] >= c ? nu[i] : c;
        const double v = m * m - eps2;
        // c*c - eps2 rounds a hair off min_value; pin the bound exactly
        out[i] = v >= min_value ? v : min_value;
    }
    return out;
}

Tensor NonNegParam::vjp(const Tensor& upstream) const {
    require(upstream.same_shape(nu), "nonneg_vjp: upstream shape mismatch");
    const double c = bound();
    Tensor out(nu.shape());
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double m = nu[i] >= c ? nu[i] : c;
        const double d_m = upstream[i] * 2.0 * m;
        out[i] = (nu[i] >= c || d_m < 0.0) ? d_m : 0.0;
    }
    return out;
}

GdnParams GdnParams::make_default(std::size_t channels, bool inverse) {
    GdnParams p;
    p.inverse = inverse;
    p.beta = NonNegParam::init(Tensor::full({channels}, 1.0), kBetaMin);
    Tensor gamma({channels, channels});
    for (std::size_t i = 0; i < channels; ++i) gamma(i, i) = 0.1;
    p.gamma = NonNegParam::init(gamma, kGammaMin);
    return p;
}

namespace {

void check_z(const Tensor& z, std::size_t channels, const char* what) {
    require(z.rank() >= 1 && z.extent(0) == channels,
            std::string(what) + ": leading extent must equal channel count");
}

} // namespace

Tensor gdn_forward(const Tensor& z, const GdnParams& p) {
    const std::size_t c = p.channels();
    check_z(z, c, "gdn_forward");
    const std::size_t positions = z.size() / c;
    const Tensor beta = p.beta.materialize();
    const Tensor gamma = p.gamma.materialize();

    Tensor out(z.shape());
    std::vector<double> zsq(c);
    for (std::size_t pos = 0; pos < positions; ++pos) {
        for (std::size_t j = 0; j < c; ++j) {
            const double v = z[j * positions + pos];
            zsq[j] = v * v;
        }
        for (std::size_t i = 0; i < c; ++i) {
            double den = beta[i];
            const double* grow = gamma.data() + i * c;
            for (std::size_t j = 0; j < c; ++j) den += grow[j] * zsq[j];
            const double r = std::sqrt(den);
            const std::size_t e = i * positions + pos;
            out[e] = p.inverse ? z[e] * r : z[e] / r;
        }
    }
    return out;
}

GdnGrads gdn_vjp(const Tensor& z, const GdnParams& p, const Tensor& upstream) {
    const std::size_t c = p.channels();
    check_z(z, c, "gdn_vjp");
    require(upstream.same_shape(z), "gdn_vjp: upstream shape mismatch");
    const std::size_t positions = z.size() / c;
    const Tensor beta = p.beta.materialize();
    const Tensor gamma = p.gamma.materialize();

    GdnGrads g;
    g.d_z = Tensor(z.shape());
    g.d_beta = Tensor(beta.shape());
    g.d_gamma = Tensor(gamma.shape());

    // sign = -1 selects y = z * den^(-1/2), +1 selects y = z * den^(+1/2);
    // in both cases dy_i/dden_i = sign/2 * z_i * den^(sign/2 - 1).
    const double sign = p.inverse ? 1.0 : -1.0;

    std::vector<double> zsq(c), den(c), w(c);
    for (std::size_t pos = 0; pos < positions; ++pos) {
        for (std::size_t j = 0; j < c; ++j) {
            const double v = z[j * positions + pos];
            zsq[j] = v * v;
        }
        for (std::size_t i = 0; i < c; ++i) {
            double d = beta[i];
            const double* grow = gamma.data() + i * c;
            for (std::size_t j = 0; j < c; ++j) d += grow[j] * zsq[j];
            den[i] = d;
        }
        // w_i = upstream_i * z_i * (sign/2) * den_i^(sign/2 - 1) is the shared
        // factor of the beta, gamma and cross-channel z derivatives.
        for (std::size_t i = 0; i < c; ++i) {
            const std::size_t e = i * positions + pos;
            const double pw = p.inverse ? 1.0 / std::sqrt(den[i]) // den^(-1/2)
                                        : 1.0 / (den[i] * std::sqrt(den[i])); // den^(-3/2)
            w[i] = upstream[e] * z[e] * 0.5 * sign * pw;
            g.d_beta[i] += w[i];
        }
        for (std::size_t i = 0; i < c; ++i) {
            double* grow = g.d_gamma.data() + i * c;
            for (std::size_t j = 0; j < c; ++j) grow[j] += w[i] * zsq[j];
        }
        for (std::size_t j = 0; j < c; ++j) {
            const std::size_t e = j * positions + pos;
            const double r = std::sqrt(den[j]);
            double acc = upstream[e] * (p.inverse ? r : 1.0 / r);
            double cross = 0.0;
            for (std::size_t i = 0; i < c; ++i) cross += w[i] * gamma[i * c + j];
            g.d_z[e] = acc + 2.0 * z[e] * cross;
        }
    }
    return g;
}

} // namespace ntc
