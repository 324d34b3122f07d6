// SPDX-License-Identifier: Apache-2.0

#include "ntc/checkpoint.hpp"
#include "ntc/error.hpp"
#include "ntc/evaluate.hpp"
#include "ntc/fdiff.hpp"
#include "ntc/loss.hpp"
#include "ntc/pink.hpp"
#include "ntc/pnm.hpp"
#include "ntc/rdft.hpp"
#include "ntc/train.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace ntc;
namespace fs = std::filesystem;

namespace {

fs::path test_dir(const std::string& name) {
    fs::path dir = fs::path("ntc_test_tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void zero_model(Model& m) {
    for (const ParamRef& p : model_parameters(m))
        if (p.name != "density.mu" && p.name != "density.sigma") p.tensor->fill(0.0);
}

void write_gray_ppm(const fs::path& path, std::size_t w, std::size_t h, unsigned char v) {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << w << " " << h << "\n255\n";
    for (std::size_t i = 0; i < w * h * 3; ++i) out.put(static_cast<char>(v));
}

} // namespace

TEST_CASE("latent geometry follows the stride stack") {
    SUBCASE("full-scale configuration") {
        TransformConfig cfg;
        cfg.n_filters = 128;
        cfg.kind = Nonlinearity::gdn;
        Model m = build_model(cfg, 1);
        Rng rng(2);
        Tensor x({3, 128, 128});
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
        Tensor y = analysis_forward(x, m);
        CHECK(y.shape() == Shape{128, 8, 8});
    }
    SUBCASE("toy configuration") {
        TransformConfig cfg;
        cfg.n_filters = 8;
        cfg.kind = Nonlinearity::gdn;
        Model m = build_model(cfg, 1);
        Tensor x({3, 16, 16});
        Tensor y = analysis_forward(x, m);
        CHECK(y.shape() == Shape{8, 1, 1});
        CHECK(synthesis_forward(y, m).shape() == Shape{3, 16, 16});
    }
    SUBCASE("extents not divisible by 16 are rejected") {
        TransformConfig cfg;
        cfg.n_filters = 8;
        Model m = build_model(cfg, 1);
        CHECK_THROWS_AS(analysis_forward(Tensor({3, 24, 16}), m), ContractViolation);
    }
}

TEST_CASE("linear configuration is linear in the input") {
    TransformConfig cfg;
    cfg.n_filters = 4;
    cfg.kind = Nonlinearity::linear;
    Model m = build_model(cfg, 5);
    for (auto& layer : m.analysis) layer.bias.fill(0.0);

    Rng rng(6);
    Tensor x1({3, 16, 16}), x2({3, 16, 16});
    for (std::size_t i = 0; i < x1.size(); ++i) {
        x1[i] = rng.normal();
        x2[i] = rng.normal();
    }
    const double a = 1.7, b = -0.4;
    Tensor mix({3, 16, 16});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x1[i] + b * x2[i];

    Tensor lhs = analysis_forward(mix, m);
    Tensor y1 = analysis_forward(x1, m);
    Tensor y2 = analysis_forward(x2, m);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::fabs(lhs[i] - (a * y1[i] + b * y2[i])) <= 1e-12);
}

TEST_CASE("zero kernels reduce the analysis to its final bias") {
    TransformConfig cfg;
    cfg.n_filters = 4;
    cfg.kind = Nonlinearity::linear;
    Model m = build_model(cfg, 7);
    for (auto& layer : m.analysis) layer.kernels.fill(0.0);
    m.analysis[0].bias.fill(0.25);
    m.analysis[1].bias.fill(-3.0);
    for (std::size_t c = 0; c < 4; ++c) m.analysis[2].bias[c] = 0.5 + static_cast<double>(c);

    Rng rng(8);
    Tensor x({3, 16, 16});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    Tensor y = analysis_forward(x, m);
    for (std::size_t c = 0; c < 4; ++c) CHECK(y[c] == m.analysis[2].bias[c]);
}

TEST_CASE("rd loss composition") {
    TransformConfig cfg;
    cfg.n_filters = 8;
    cfg.kind = Nonlinearity::gdn;
    Model m = build_model(cfg, 9);
    Rng rng(10);
    Tensor x({3, 16, 16});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
    const Tensor noise = sample_unit_noise({8, 1, 1}, rng);

    SUBCASE("lambda 0 makes the loss pure rate") {
        LossResult r = rd_loss_with_noise(x, m, 0.0, noise);
        CHECK(r.loss.total == r.loss.rate_bpp);
        CHECK(r.loss.distortion >= 0.0);
    }
    SUBCASE("decomposition holds exactly") {
        LossResult r = rd_loss_with_noise(x, m, 0.87, noise);
        CHECK(r.loss.total == r.loss.rate_bpp + 0.87 * r.loss.distortion);
        CHECK(r.loss.rate_bpp >= 0.0);
    }
    SUBCASE("noise shape is validated") {
        CHECK_THROWS_AS(rd_loss_with_noise(x, m, 0.0, Tensor({8, 2, 1})), ContractViolation);
    }
}

TEST_CASE("end-to-end parameter gradients match finite differences") {
    TransformConfig cfg;
    cfg.n_filters = 2;
    cfg.kind = Nonlinearity::tanh;
    Model m = build_model(cfg, 11);
    Rng rng(12);
    Tensor x({3, 16, 16});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
    const Tensor noise = sample_unit_noise({2, 1, 1}, rng);
    LossResult base = rd_loss_with_noise(x, m, 0.5, noise);
    auto f = [&] { return rd_loss_with_noise(x, m, 0.5, noise).loss.total; };
    std::vector<ParamRef> params = model_parameters(m);
    std::vector<ParamRef> grads = grad_parameters(base.grads);
    REQUIRE(params.size() == grads.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        CAPTURE(params[i].name);
        CHECK(max_rel_err_fd(f, *params[i].tensor, *grads[i].tensor) <= 1e-5);
    }
}

TEST_CASE("training is deterministic and zero steps change nothing") {
    TransformConfig cfg;
    cfg.n_filters = 8;
    cfg.kind = Nonlinearity::gdn;

    TrainConfig tc;
    tc.steps = 20;
    tc.batch = 2;
    tc.seed = 77;
    tc.patch_size = 16;

    SUBCASE("zero steps") {
        Model m = build_model(cfg, 13);
        Model before = m;
        PinkSource src(16);
        TrainConfig zero = tc;
        zero.steps = 0;
        TrainResult r = train(m, zero, src);
        CHECK(r.trajectory.empty());
        std::vector<ParamRef> pa = model_parameters(m);
        std::vector<ParamRef> pb = model_parameters(before);
        for (std::size_t i = 0; i < pa.size(); ++i)
            CHECK(max_abs_diff(*pa[i].tensor, *pb[i].tensor) == 0.0);
    }
    SUBCASE("identical seeds give bit-identical trajectories") {
        Model m1 = build_model(cfg, 13);
        Model m2 = build_model(cfg, 13);
        PinkSource s1(16), s2(16);
        TrainResult r1 = train(m1, tc, s1);
        TrainResult r2 = train(m2, tc, s2);
        REQUIRE(r1.trajectory.size() == r2.trajectory.size());
        for (std::size_t i = 0; i < r1.trajectory.size(); ++i)
            CHECK(r1.trajectory[i].loss == r2.trajectory[i].loss);
        CHECK(r1.final_loss == r2.final_loss);
        std::vector<ParamRef> pa = model_parameters(m1);
        std::vector<ParamRef> pb = model_parameters(m2);
        for (std::size_t i = 0; i < pa.size(); ++i)
            CHECK(max_abs_diff(*pa[i].tensor, *pb[i].tensor) == 0.0);
    }
    SUBCASE("sadam path only reroutes the conv kernels") {
        Model m1 = build_model(cfg, 13);
        Model m2 = build_model(cfg, 13);
        PinkSource s1(16), s2(16);
        TrainConfig one = tc;
        one.steps = 1; // identical gradients on the first step
        TrainConfig ts = one;
        ts.optimizer = OptimizerKind::sadam;
        train(m1, one, s1);
        train(m2, ts, s2);
        CHECK(max_abs_diff(m1.analysis[0].kernels, m2.analysis[0].kernels) > 0.0);
        // biases, normalization and density parameters take the plain path
        CHECK(max_abs_diff(m1.analysis[0].bias, m2.analysis[0].bias) == 0.0);
        CHECK(max_abs_diff(m1.density.mu, m2.density.mu) == 0.0);
        CHECK(max_abs_diff(m1.analysis_gdn[0].beta.nu, m2.analysis_gdn[0].beta.nu) == 0.0);
    }
}

TEST_CASE("sampled trajectory row layout") {
    TrainResult r;
    for (std::size_t t = 0; t < 500; ++t) r.trajectory.push_back({t, 1.0 / (1.0 + t)});
    r.final_loss = 0.5;
    std::vector<StepRecord> rows = sampled_trajectory(r, 100, 500);
    REQUIRE(rows.size() == 6); // 0,100,200,300,400 plus the final row
    CHECK(rows.front().step == 0);
    CHECK(rows[4].step == 400);
    CHECK(rows.back().step == 500);
    CHECK(rows.back().loss == 0.5);
}

TEST_CASE("pink patches: determinism, normalization, spectral slope") {
    SUBCASE("bit-identical per seed") {
        std::vector<Tensor> a = gen_pink_patches(3, 16, 99);
        std::vector<Tensor> b = gen_pink_patches(3, 16, 99);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(max_abs_diff(a[i], b[i]) == 0.0);
        std::vector<Tensor> c = gen_pink_patches(1, 16, 100);
        CHECK(max_abs_diff(a[0], c[0]) > 0.0);
    }
    SUBCASE("zero mean, unit variance per patch") {
        Rng rng(101);
        Tensor p = gen_pink_patch(32, 1, rng);
        double mean = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) mean += p[i];
        mean /= static_cast<double>(p.size());
        CHECK(std::fabs(mean) <= 1e-10);
        double var = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) var += p[i] * p[i];
        var /= static_cast<double>(p.size());
        CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("radial periodogram slope near -2") {
        const std::size_t n = 64;
        const RdftBasis basis = RdftBasis::make(n);
        std::vector<double> power(n, 0.0);
        std::vector<double> count(n, 0.0);
        Rng rng(103);
        for (int patch = 0; patch < 100; ++patch) {
            Tensor field = gen_pink_patch(n, 1, rng).reshaped({1, 1, n, n});
            Tensor coeff = rdft2_apply(field, basis, false);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    const double fh = static_cast<double>(RdftBasis::harmonic(a));
                    const double fw = static_cast<double>(RdftBasis::harmonic(b));
                    const std::size_t bin =
                        static_cast<std::size_t>(std::lround(std::sqrt(fh * fh + fw * fw)));
                    if (bin >= 1 && bin < n / 2) {
                        power[bin] += coeff(0, 0, a, b) * coeff(0, 0, a, b);
                        count[bin] += 1.0;
                    }
                }
        }
        // least squares on log power vs log frequency
        double sx = 0, sy = 0, sxx = 0, sxy = 0, pts = 0;
        for (std::size_t bin = 1; bin < n / 2; ++bin) {
            if (count[bin] == 0.0) continue;
            const double lx = std::log(static_cast<double>(bin));
            const double ly = std::log(power[bin] / count[bin]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            pts += 1.0;
        }
        const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
        CHECK(slope >= -2.5);
        CHECK(slope <= -1.5);
    }
}

TEST_CASE("psnr formula") {
    CHECK(psnr_db(0.01) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr_db(0.25) == doctest::Approx(6.0206).epsilon(1e-4));
    CHECK(std::isinf(psnr_db(0.0)));
}

TEST_CASE("center crop to a multiple") {
    Tensor im({3, 33, 47});
    for (std::size_t i = 0; i < im.size(); ++i) im[i] = static_cast<double>(i);
    Tensor c = center_crop_to_multiple(im, 16);
    CHECK(c.shape() == Shape{3, 32, 32});
    CHECK(c(0, 0, 0) == im(0, 0, 7)); // offsets (33-32)/2 = 0, (47-32)/2 = 7
    CHECK_THROWS_AS(center_crop_to_multiple(Tensor({3, 8, 8}), 16), ContractViolation);
}

TEST_CASE("evaluation of a zero-latent exact-reconstruction model") {
    const fs::path dir = test_dir("eval_zero");
    const unsigned char gray = 127;
    write_gray_ppm(dir / "flat.ppm", 32, 32, gray);

    TransformConfig cfg;
    cfg.n_filters = 8;
    cfg.kind = Nonlinearity::linear;
    Model m = build_model(cfg, 17);
    zero_model(m);
    const double g = static_cast<double>(gray) * (1.0 / 255.0);
    m.synthesis[2].bias.fill(g);
    m.density.sigma.fill(-4.6); // scale ~ 0.01: essentially all mass on the zero bin

    EvalSummary s = evaluate(m, {(dir / "flat.ppm").string()});
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].bpp <= 1e-6);
    CHECK(std::isinf(s.rows[0].psnr));

    const std::string csv = format_eval_csv(s);
    CHECK(csv.rfind("image,bpp,psnr\n", 0) == 0);
    CHECK(csv.find("inf") != std::string::npos);
    CHECK(csv.find("MEAN,") != std::string::npos);
}

TEST_CASE("evaluation skips unreadable files and keeps going") {
    const fs::path dir = test_dir("eval_skip");
    write_gray_ppm(dir / "ok.ppm", 32, 32, 100);
    std::ofstream(dir / "broken.ppm") << "not a ppm";

    TransformConfig cfg;
    cfg.n_filters = 8;
    cfg.kind = Nonlinearity::gdn;
    Model m = build_model(cfg, 19);
    EvalSummary s = evaluate(m, {(dir / "broken.ppm").string(), (dir / "ok.ppm").string()});
    CHECK(s.rows.size() == 1);
    CHECK(s.skipped.size() == 1);
    CHECK(s.rows[0].bpp > 0.0);
}

TEST_CASE("train aborts with a diagnostic on non-finite loss") {
    TransformConfig cfg;
    cfg.n_filters = 8;
    cfg.kind = Nonlinearity::gdn;
    Model m = build_model(cfg, 21);
    m.analysis[0].kernels.fill(std::numeric_limits<double>::quiet_NaN());
    PinkSource src(16);
    TrainConfig tc;
    tc.steps = 3;
    tc.batch = 1;
    CHECK_THROWS_AS(train(m, tc, src), NumericError);
}
