// SPDX-License-Identifier: Apache-2.0

#include "ntc/gdn.hpp"

#include "ntc/error.hpp"
#include "ntc/fdiff.hpp"
#include "ntc/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace ntc;

namespace {

GdnParams scalar_params(double beta, double gamma, bool inverse) {
    GdnParams p;
    p.inverse = inverse;
    p.beta = NonNegParam::init(Tensor({1}, {beta}), kBetaMin);
    p.gamma = NonNegParam::init(Tensor({1, 1}, {gamma}), kGammaMin);
    return p;
}

} // namespace

TEST_CASE("nonneg materialize clamps at the minimum") {
    NonNegParam p;
    p.min_value = kBetaMin;
    p.nu = Tensor({3}, {0.0, -5.0, 1.0});
    Tensor b = p.materialize();
    CHECK(b[0] == kBetaMin); // clamp active: exact minimum
    CHECK(b[1] == kBetaMin);
    CHECK(b[2] == 1.0 - 0x1.0p-36);
}

TEST_CASE("nonneg init round trips off the clamp") {
    SUBCASE("gamma boundary value 0") {
        NonNegParam p = NonNegParam::init(Tensor({1}, {0.0}), 0.0);
        CHECK(p.nu[0] == kGdnEpsilon); // nu = sqrt(0 + eps^2)
        CHECK(p.materialize()[0] == 0.0);
    }
    SUBCASE("value 1") {
        NonNegParam p = NonNegParam::init(Tensor({1}, {1.0}), kBetaMin);
        CHECK(p.nu[0] == doctest::Approx(1.0 + 7.276e-12).epsilon(1e-12));
        CHECK(std::fabs(p.materialize()[0] - 1.0) <= 1e-12);
    }
    SUBCASE("value at the minimum lands exactly on the bound") {
        NonNegParam p = NonNegParam::init(Tensor({1}, {kBetaMin}), kBetaMin);
        CHECK(p.nu[0] == p.bound());
        CHECK(std::fabs(p.materialize()[0] - kBetaMin) <= 1e-12 * kBetaMin);
    }
    SUBCASE("random round trips") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            const double v = rng.uniform(kBetaMin, 10.0);
            NonNegParam p = NonNegParam::init(Tensor({1}, {v}), kBetaMin);
            CHECK(std::fabs(p.materialize()[0] - v) <= 1e-12 * std::max(1.0, v));
        }
    }
    SUBCASE("below the minimum is rejected") {
        CHECK_THROWS_AS(NonNegParam::init(Tensor({1}, {0.0}), kBetaMin), ContractViolation);
    }
}

TEST_CASE("gated gradient of the clamped reparameterization") {
    NonNegParam p;
    p.min_value = kBetaMin;
    const double c = p.bound();

    SUBCASE("above the bound: plain chain rule") {
        p.nu = Tensor({1}, {1.0});
        Tensor g = p.vjp(Tensor({1}, {0.5}));
        CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15)); // 0.5 * 2 * 1
    }
    SUBCASE("below the bound, downhill pressure passes") {
        p.nu = Tensor({1}, {0.0});
        Tensor g = p.vjp(Tensor({1}, {-1.0}));
        CHECK(g[0] == doctest::Approx(-2.0 * c).epsilon(1e-15));
        CHECK(g[0] < 0.0); // stuck-at-zero escape stays possible
    }
    SUBCASE("below the bound, uphill pressure is gated off") {
        p.nu = Tensor({1}, {0.0});
        Tensor g = p.vjp(Tensor({1}, {1.0}));
        CHECK(g[0] == 0.0);
    }
}

TEST_CASE("gdn identity configuration") {
    GdnParams p = scalar_params(1.0, 0.0, false);
    Tensor z({1, 2, 2}, {0.3, -1.5, 2.0, 0.0});
    Tensor y = gdn_forward(z, p);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == z[i]);
    p.inverse = true;
    y = gdn_forward(z, p);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == z[i]);
}

TEST_CASE("gdn scalar values") {
    Tensor z({1}, {2.0});
    CHECK(gdn_forward(z, scalar_params(1, 1, false))[0] ==
          doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(gdn_forward(z, scalar_params(1, 1, true))[0] ==
          doctest::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("gdn vjp identity configuration passes the upstream through") {
    GdnParams p = scalar_params(1.0, 0.0, false);
    Tensor z({1, 2, 2}, {0.3, -1.5, 2.0, 0.7});
    Tensor up({1, 2, 2}, {1.0, -2.0, 0.5, 3.0});
    GdnGrads g = gdn_vjp(z, p, up);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.d_z[i] == up[i]);
}

TEST_CASE("gdn beta derivative carries the -1/2 factor") {
    // direct differentiation of the l2-form divides the printed parameter
    // derivative by -2; finite differences decide
    GdnParams p = scalar_params(1.0, 0.0, false);
    Tensor z({1}, {1.0});
    Tensor up({1}, {1.0});
    GdnGrads g = gdn_vjp(z, p, up);
    CHECK(std::fabs(g.d_beta[0] - (-0.5)) <= 1e-9);

    Tensor beta({1}, {1.0});
    auto f = [&] {
        GdnParams q = scalar_params(beta[0], 0.0, false);
        return dot(up, gdn_forward(z, q));
    };
    const double fd = central_diff(f, beta[0]);
    CHECK(std::fabs(fd - (-0.5)) <= 1e-9);
}

TEST_CASE("gdn gamma derivative value") {
    GdnParams p = scalar_params(1.0, 1.0, false);
    Tensor z({1}, {2.0});
    Tensor up({1}, {1.0});
    GdnGrads g = gdn_vjp(z, p, up);
    const double expected = -0.5 * 2.0 * 4.0 * std::pow(5.0, -1.5);
    CHECK(g.d_gamma[0] == doctest::Approx(expected).epsilon(1e-9));
    CHECK(g.d_gamma[0] == doctest::Approx(-0.357771).epsilon(1e-5));
}

TEST_CASE("gdn sign preservation and denominator bound") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = 1 + rng.below(4);
        GdnParams p;
        p.inverse = trial % 2 == 1;
        Tensor beta({c}), gamma({c, c});
        for (std::size_t i = 0; i < c; ++i) beta[i] = rng.uniform(kBetaMin, 2.0);
        for (std::size_t i = 0; i < c * c; ++i) gamma[i] = rng.uniform(0.0, 1.0);
        p.beta = NonNegParam::init(beta, kBetaMin);
        p.gamma = NonNegParam::init(gamma, kGammaMin);
        Tensor z({c, 3});
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = 3.0 * rng.normal();
        Tensor y = gdn_forward(z, p);
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i] > 0.0) CHECK(y[i] > 0.0);
            if (z[i] < 0.0) CHECK(y[i] < 0.0);
            if (z[i] == 0.0) CHECK(y[i] == 0.0);
        }
    }
}

TEST_CASE("gdn output times sqrt(denominator) recovers the input") {
    Rng rng(29);
    const std::size_t c = 3;
    GdnParams p;
    Tensor beta({c}), gamma({c, c});
    for (std::size_t i = 0; i < c; ++i) beta[i] = rng.uniform(0.5, 2.0);
    for (std::size_t i = 0; i < c * c; ++i) gamma[i] = rng.uniform(0.0, 0.5);
    p.beta = NonNegParam::init(beta, kBetaMin);
    p.gamma = NonNegParam::init(gamma, kGammaMin);
    Tensor z({c, 4});
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.normal();

    Tensor y = gdn_forward(z, p);
    const Tensor bm = p.beta.materialize();
    const Tensor gm = p.gamma.materialize();
    for (std::size_t pos = 0; pos < 4; ++pos)
        for (std::size_t i = 0; i < c; ++i) {
            double den = bm[i];
            for (std::size_t j = 0; j < c; ++j)
                den += gm[i * c + j] * z[j * 4 + pos] * z[j * 4 + pos];
            const double recovered = y[i * 4 + pos] * std::sqrt(den);
            CHECK(std::fabs(recovered - z[i * 4 + pos]) <= 1e-12);
        }
}

TEST_CASE("effective step size of the squared reparameterization") {
    // pure beta = nu^2 (no clamp, eps = 0): a step of size rho on nu moves
    // beta by -4*beta*rho*(1 - rho*G)*G
    NonNegParam p;
    p.min_value = 0.0;
    p.epsilon = 0.0;
    p.nu = Tensor({1}, {1.0}); // beta = 1
    const double rho = 0.01, G = 1.0;
    const double dnu = p.vjp(Tensor({1}, {G}))[0];
    NonNegParam stepped = p;
    stepped.nu[0] -= rho * dnu;
    const double delta = stepped.materialize()[0] - p.materialize()[0];
    CHECK(delta == doctest::Approx(-0.0396).epsilon(1e-12));
}

TEST_CASE("gdn vjp shape mismatch is rejected") {
    GdnParams p = GdnParams::make_default(2, false);
    Tensor z({2, 3});
    CHECK_THROWS_AS(gdn_vjp(z, p, Tensor({2, 4})), ContractViolation);
    CHECK_THROWS_AS(gdn_forward(Tensor({3, 3}), p), ContractViolation);
}
