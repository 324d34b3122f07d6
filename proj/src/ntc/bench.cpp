// SPDX-License-Identifier: Apache-2.0

#include "ntc/bench.hpp"

#include "ntc/error.hpp"
#include "ntc/pink.hpp"

#include <cstdio>

namespace ntc {

BenchOptimizer bench_optimizer_from_name(std::string_view name) {
    if (name == "sgd") return BenchOptimizer::sgd;
    if (name == "whitened-sgd") return BenchOptimizer::whitened_sgd;
    if (name == "adam") return BenchOptimizer::adam;
    if (name == "sadam") return BenchOptimizer::sadam;
    throw ConfigError("unknown benchmark optimizer: " + std::string(name));
}

std::string_view bench_optimizer_name(BenchOptimizer kind) {
    switch (kind) {
    case BenchOptimizer::sgd: return "sgd";
    case BenchOptimizer::whitened_sgd: return "whitened-sgd";
    case BenchOptimizer::adam: return "adam";
    case BenchOptimizer::sadam: return "sadam";
    }
    return "?";
}

BenchResult run_filter_recovery(const BenchConfig& config) {
    require(config.steps >= 1, "bench: steps must be >= 1");
    require(config.log_interval >= 1, "bench: log interval must be >= 1");
    const std::size_t k = config.kernel;
    const std::size_t dim = k * k;

    // The whitener is estimated from its own stream so that every optimizer
    // sees an identical training sequence.
    WhiteningOperator whitener = WhiteningOperator::identity(dim);
    if (config.optimizer == BenchOptimizer::whitened_sgd && !config.whiten_identity) {
        Rng est_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
        Tensor samples({config.whiten_samples, dim});
        for (std::size_t r = 0; r < config.whiten_samples; ++r) {
            const Tensor patch = gen_pink_patch(k, 1, est_rng);
            for (std::size_t i = 0; i < dim; ++i) samples[r * dim + i] = patch[i];
        }
        whitener = estimate_whitener(samples);
    }

    Rng rng(config.seed);
    Tensor target({dim});
    for (std::size_t i = 0; i < dim; ++i) target[i] = config.target_std * rng.normal();
    Tensor filter({dim}); // starts at zero

    AdamConfig acfg;
    acfg.rho = config.rho;
    AdamState adam = AdamState::make({dim}, acfg);
    SadamState sadam = SadamState::make({1, 1, k, k}, acfg);

    Tensor samples({config.batch, dim});
    std::vector<double> coeffs(config.batch);

    auto sample_batch_loss = [&]() {
        double loss = 0.0;
        for (std::size_t b = 0; b < config.batch; ++b) {
            const Tensor patch = gen_pink_patch(k, 1, rng);
            double err = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                samples[b * dim + i] = patch[i];
                err += (filter[i] - target[i]) * patch[i];
            }
            coeffs[b] = err / static_cast<double>(config.batch);
            loss += 0.5 * err * err;
        }
        return loss / static_cast<double>(config.batch);
    };

    BenchResult result;
    for (std::size_t step = 0; step < config.steps; ++step) {
        const double loss = sample_batch_loss();
        if (step % config.log_interval == 0) result.log.push_back({step, loss});

        switch (config.optimizer) {
        case BenchOptimizer::sgd:
            sgd_step(filter, coeffs, samples, config.rho);
            break;
        case BenchOptimizer::whitened_sgd:
            whitened_sgd_step(filter, coeffs, samples, whitener, config.rho);
            break;
        case BenchOptimizer::adam: {
            Tensor grad({dim});
            for (std::size_t b = 0; b < config.batch; ++b)
                for (std::size_t i = 0; i < dim; ++i) grad[i] += coeffs[b] * samples[b * dim + i];
            adam_step(adam, filter, grad);
            break;
        }
        case BenchOptimizer::sadam: {
            Tensor grad({1, 1, k, k});
            for (std::size_t b = 0; b < config.batch; ++b)
                for (std::size_t i = 0; i < dim; ++i) grad[i] += coeffs[b] * samples[b * dim + i];
            Tensor reshaped = filter.reshaped({1, 1, k, k});
            sadam_step(sadam, reshaped, grad);
            filter = reshaped.reshaped({dim});
            break;
        }
        }
    }

    // final row: lower-variance estimate on a fresh stream, shared across
    // optimizers running the same seed
    Rng eval_rng(config.seed ^ 0x5eedb00fc0ffee11ull);
    double eval_loss = 0.0;
    for (std::size_t b = 0; b < config.eval_batch; ++b) {
        const Tensor patch = gen_pink_patch(k, 1, eval_rng);
        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) err += (filter[i] - target[i]) * patch[i];
        eval_loss += 0.5 * err * err / static_cast<double>(config.eval_batch);
    }
    result.final_loss = eval_loss;
    result.log.push_back({config.steps, result.final_loss});
    return result;
}

std::string format_step_csv(const std::vector<StepRecord>& rows) {
    std::string out = "Step,Value\n";
    char buf[64];
    for (const StepRecord& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", r.step, r.loss);
        out += buf;
    }
    return out;
}

} // namespace ntc
