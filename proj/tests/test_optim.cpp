// SPDX-License-Identifier: Apache-2.0

#include "ntc/optim.hpp"

#include "ntc/error.hpp"
#include "ntc/linalg.hpp"
#include "ntc/pink.hpp"
#include "ntc/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace ntc;

namespace {

Tensor randn(const Shape& shape, Rng& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

double max_ortho_err(const RdftBasis& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < b.n; ++i)
        for (std::size_t j = 0; j < b.n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < b.n; ++t) acc += b.matrix(i, t) * b.matrix(j, t);
            worst = std::max(worst, std::fabs(acc - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

} // namespace

TEST_CASE("rdft basis small cases") {
    RdftBasis b1 = RdftBasis::make(1);
    CHECK(b1.matrix[0] == 1.0);

    RdftBasis b2 = RdftBasis::make(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(b2.matrix(0, 0) == s);
    CHECK(b2.matrix(0, 1) == s);
    CHECK(b2.matrix(1, 0) == s);
    CHECK(b2.matrix(1, 1) == -s);

    CHECK_THROWS_AS(RdftBasis::make(0), ContractViolation);
}

TEST_CASE("rdft orthogonality over the required extents") {
    for (std::size_t n : {1, 2, 4, 5, 8, 9, 16, 25})
        CHECK(max_ortho_err(RdftBasis::make(n)) <= 1e-12);
}

TEST_CASE("rdft2 of a constant slice concentrates on the DC coefficient") {
    const std::size_t k = 9;
    const double c = 0.37;
    Tensor h = Tensor::full({1, 1, k, k}, c);
    RdftBasis b = RdftBasis::make(k);
    Tensor g = rdft2_apply(h, b, false);
    CHECK(g[0] == doctest::Approx(c * k).epsilon(1e-13));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(std::fabs(g[i]) <= 1e-13 * k);
}

TEST_CASE("rdft2 round trip and k=1 identity") {
    Rng rng(31);
    Tensor h = randn({2, 3, 5, 5}, rng);
    RdftBasis b = RdftBasis::make(5);
    Tensor back = rdft2_apply(rdft2_apply(h, b, false), b, true);
    CHECK(max_abs_diff(h, back) <= 1e-12);

    Tensor h1 = randn({2, 3, 1, 1}, rng);
    RdftBasis b1 = RdftBasis::make(1);
    CHECK(max_abs_diff(h1, rdft2_apply(h1, b1, false)) == 0.0);

    CHECK_THROWS_AS(rdft2_apply(h, b1, false), ContractViolation);
}

TEST_CASE("adam: zero gradient moves nothing") {
    AdamConfig cfg;
    cfg.rho = 1e-3;
    Tensor p({4}, {1, 2, 3, 4});
    AdamState st = AdamState::make(p.shape(), cfg);
    adam_step(st, p, Tensor({4}));
    CHECK(p[0] == 1.0);
    CHECK(p[3] == 4.0);
    CHECK(st.t == 1);
}

TEST_CASE("adam first step is sign descent up to the guard") {
    AdamConfig cfg;
    cfg.rho = 1e-4;
    Tensor p({1});
    AdamState st = AdamState::make(p.shape(), cfg);
    adam_step(st, p, Tensor({1}, {0.1}));
    const double expected = -cfg.rho * 0.1 / (0.1 + cfg.guard);
    CHECK(p[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(-9.99999e-5).epsilon(1e-6));
}

TEST_CASE("adam under constant gradient settles at -rho * sign") {
    AdamConfig cfg;
    cfg.rho = 1e-4;
    Tensor p({2});
    AdamState st = AdamState::make(p.shape(), cfg);
    Tensor g({2}, {2.0, -0.5});
    double prev0 = p[0];
    for (int t = 0; t < 200; ++t) {
        adam_step(st, p, g);
        const double step0 = p[0] - prev0;
        prev0 = p[0];
        CHECK(std::fabs(step0 - (-cfg.rho)) <= 1e-9 * cfg.rho + 1e-12);
    }
    CHECK(p[1] == doctest::Approx(200 * cfg.rho).epsilon(1e-7));
}

TEST_CASE("adam rejects mismatched shapes") {
    AdamConfig cfg;
    Tensor p({3});
    AdamState st = AdamState::make({4}, cfg);
    CHECK_THROWS_AS(adam_step(st, p, Tensor({3})), ContractViolation);
}

TEST_CASE("sadam equals adam for 1x1 spatial kernels") {
    Rng rng(37);
    AdamConfig cfg;
    cfg.rho = 1e-4;
    Tensor pa = randn({3, 2, 1, 1}, rng);
    Tensor pb = pa;
    AdamState adam = AdamState::make(pa.shape(), cfg);
    SadamState sadam = SadamState::make(pb.shape(), cfg);
    for (int t = 0; t < 1000; ++t) {
        Tensor g = randn(pa.shape(), rng);
        adam_step(adam, pa, g);
        sadam_step(sadam, pb, g);
    }
    CHECK(max_abs_diff(pa, pb) <= 1e-12);
}

TEST_CASE("sadam DC gradient first step spreads -rho/sqrt(n)") {
    AdamConfig cfg;
    cfg.rho = 1e-4;
    Tensor h({1, 1, 1, 4});
    SadamState st = SadamState::make(h.shape(), cfg);
    sadam_step(st, h, Tensor::full(h.shape(), 0.9));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::fabs(h[i] - (-cfg.rho / 2.0)) <= 1e-12);

    // contrast with adam on the same gradient: a full -rho per element
    Tensor ha({1, 1, 1, 4});
    AdamState ast = AdamState::make(ha.shape(), cfg);
    adam_step(ast, ha, Tensor::full(ha.shape(), 0.9));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::fabs(ha[i] - (-cfg.rho)) <= 1e-11);
}

TEST_CASE("sadam dual-path spectral equivalence") {
    Rng rng(41);
    AdamConfig cfg;
    cfg.rho = 1e-4;
    Tensor spatial = randn({2, 2, 5, 5}, rng);
    RdftBasis basis = RdftBasis::make(5);
    Tensor spectral = rdft2_apply(spatial, basis, false);
    SadamState sadam = SadamState::make(spatial.shape(), cfg);
    AdamState adam = AdamState::make(spectral.shape(), cfg);
    for (int t = 0; t < 100; ++t) {
        Tensor g = randn(spatial.shape(), rng);
        sadam_step(sadam, spatial, g);
        adam_step(adam, spectral, rdft2_apply(g, basis, false));
    }
    CHECK(max_abs_diff(spatial, rdft2_apply(spectral, basis, true)) <= 1e-12);
}

TEST_CASE("whitener on white data is close to identity") {
    Rng rng(43);
    const std::size_t d = 16, n = 10000;
    Tensor samples({n, d});
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = rng.normal();
    WhiteningOperator w = estimate_whitener(samples);
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            worst = std::max(worst, std::fabs(w.p(i, j) - (i == j ? 1.0 : 0.0)));
    CHECK(worst <= 0.1);

    // scaling the data by 3 scales the whitener by 1/3
    Tensor scaled = samples;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= 3.0;
    WhiteningOperator w3 = estimate_whitener(scaled);
    for (std::size_t i = 0; i < d; ++i)
        CHECK(w3.p(i, i) == doctest::Approx(w.p(i, i) / 3.0).epsilon(1e-6));
}

TEST_CASE("whitener floor keeps rank-deficient data finite") {
    Tensor samples({8, 4});
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t j = 0; j < 4; ++j) samples(r, j) = 5.0; // constant rows
    WhiteningOperator w = estimate_whitener(samples);
    CHECK(w.p.all_finite());
    CHECK_THROWS_AS(estimate_whitener(Tensor({2, 4})), ContractViolation);
}

TEST_CASE("whitener equalizes pink-noise covariance") {
    // raw fields: the per-patch normalized variant is exactly zero-mean and
    // hence rank-deficient along the constant direction
    const std::size_t k = 9, d = k * k, n = 10000;
    Rng rng(47);
    Tensor samples({n, d});
    for (std::size_t r = 0; r < n; ++r) {
        Tensor patch = gen_pink_field(k, rng);
        for (std::size_t i = 0; i < d; ++i) samples(r, i) = patch[i];
    }
    WhiteningOperator w = estimate_whitener(samples);

    // fresh sample; cov(P x) should have eigenvalues near one
    Tensor fresh({n, d});
    for (std::size_t r = 0; r < n; ++r) {
        Tensor patch = gen_pink_field(k, rng);
        const double* x = patch.data();
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += w.p(i, j) * x[j];
            fresh(r, i) = acc;
        }
    }
    Tensor cov({d, d});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) cov(i, j) += fresh(r, i) * fresh(r, j) / n;
    SymEig eig = jacobi_eigensymm(cov);
    for (std::size_t i = 0; i < d; ++i) {
        CHECK(eig.values[i] >= 0.5);
        CHECK(eig.values[i] <= 2.0);
    }
}

TEST_CASE("whitened sgd with identity equals plain sgd bit for bit") {
    Rng rng(53);
    const std::size_t d = 9, batch = 4;
    Tensor samples = randn({batch, d}, rng);
    std::vector<double> coeffs = {0.3, -0.7, 1.1, 0.2};
    Tensor h1({d}), h2({d});
    sgd_step(h1, coeffs, samples, 1e-3);
    whitened_sgd_step(h2, coeffs, samples, WhiteningOperator::identity(d), 1e-3);
    CHECK(max_abs_diff(h1, h2) == 0.0);
}

TEST_CASE("whitened sgd with diag(2) doubles every update component") {
    Rng rng(59);
    const std::size_t d = 6, batch = 3;
    Tensor samples = randn({batch, d}, rng);
    std::vector<double> coeffs = {0.5, -1.0, 2.0};
    Tensor hs({d}), hw({d});
    sgd_step(hs, coeffs, samples, 1e-3);
    WhiteningOperator w = WhiteningOperator::identity(d);
    for (std::size_t i = 0; i < d; ++i) w.p(i, i) = 2.0;
    whitened_sgd_step(hw, coeffs, samples, w, 1e-3);
    for (std::size_t i = 0; i < d; ++i) CHECK(hw[i] == 2.0 * hs[i]);
}

TEST_CASE("jacobi eigendecomposition reconstructs the matrix") {
    Rng rng(61);
    const std::size_t n = 10;
    Tensor a({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            a(i, j) = rng.normal();
            a(j, i) = a(i, j);
        }
    SymEig eig = jacobi_eigensymm(a);
    // A = V diag(w) V^T
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t)
                acc += eig.vectors(i, t) * eig.values[t] * eig.vectors(j, t);
            worst = std::max(worst, std::fabs(acc - a(i, j)));
        }
    CHECK(worst <= 1e-10);
}
