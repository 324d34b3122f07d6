// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ntc {

// Single-filter recovery benchmark: learn a k x k filter h so that h'x
// matches h*'x on pink-noise patches under squared prediction loss. Isolates
// the optimizer-conditioning effect from the rest of the pipeline.
enum class BenchOptimizer { sgd, whitened_sgd, adam, sadam };

BenchOptimizer bench_optimizer_from_name(std::string_view name); // throws ConfigError
std::string_view bench_optimizer_name(BenchOptimizer kind);

struct BenchConfig {
    BenchOptimizer optimizer = BenchOptimizer::adam;
    double rho = 1e-4;
    std::size_t steps = 2000;
    std::uint64_t seed = 1;
    std::size_t batch = 16;
    std::size_t log_interval = 10;
    std::size_t kernel = 9;
    double target_std = 0.05;      // scale of the recovered filter's entries
    std::size_t eval_batch = 512;  // fresh patches for the final-loss row
    std::size_t whiten_samples = 2000;
    bool whiten_identity = false; // test fixture: skip estimation, use P = I
};

struct BenchResult {
    std::vector<StepRecord> log; // rows at 0, interval, ..., plus a final row at `steps`
    double final_loss = 0.0;     // measured on the eval batch, paired per seed
};

BenchResult run_filter_recovery(const BenchConfig& config);

// Step,Value rows, LF line endings, %.12g values.
std::string format_step_csv(const std::vector<StepRecord>& rows);

} // namespace ntc
