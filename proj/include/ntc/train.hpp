// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/loss.hpp"
#include "ntc/optim.hpp"
#include "ntc/transform.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ntc {

enum class OptimizerKind { adam, sadam };

OptimizerKind optimizer_from_name(std::string_view name); // throws ConfigError
std::string_view optimizer_name(OptimizerKind kind);

struct TrainConfig {
    double lambda = 0.25;
    double rho = 1e-4;
    OptimizerKind optimizer = OptimizerKind::adam;
    std::size_t batch = 8;
    std::size_t steps = 0;
    std::uint64_t seed = 1;
    std::size_t patch_size = 16;
};

// Yields [3,p,p] training patches.
class DataSource {
public:
    virtual ~DataSource() = default;
    virtual Tensor next_patch(Rng& rng) = 0;
};

// Pink-noise fields mapped into image range: 0.5 + 0.2 * field, clamped to
// [0,1], matching the scale the distortion term is defined on.
class PinkSource final : public DataSource {
public:
    explicit PinkSource(std::size_t patch_size) : patch_size_(patch_size) {}
    Tensor next_patch(Rng& rng) override;

private:
    std::size_t patch_size_;
};

// Random crops from a fixed list of loaded images.
class ImagePatchSource final : public DataSource {
public:
    ImagePatchSource(std::vector<Tensor> images, std::size_t patch_size);
    Tensor next_patch(Rng& rng) override;

private:
    std::vector<Tensor> images_;
    std::size_t patch_size_;
};

// Convolution kernels go through the configured optimizer (spectral moments
// for sadam); biases, normalization parameters and density parameters always
// use plain Adam.
struct ModelOptimizer {
    OptimizerKind kind;
    std::vector<SadamState> kernel_sadam;
    std::vector<AdamState> kernel_adam;
    std::vector<AdamState> other;

    static ModelOptimizer make(Model& m, OptimizerKind kind, double rho);
    void step(Model& m, ModelGrads& grads);
};

struct StepRecord {
    std::size_t step;
    double loss;
};

struct TrainResult {
    std::vector<StepRecord> trajectory; // record t = batch loss before update t (t = 0..steps-1)
    double final_loss = 0.0;            // fresh-batch loss after the last update
};

// Rows at multiples of `interval` plus a final row {steps, final_loss}.
std::vector<StepRecord> sampled_trajectory(const TrainResult& result, std::size_t interval,
                                           std::size_t steps);

// Deterministic per (config.seed, config): batch sampling, noise draws and
// updates all consume one seeded stream. Throws NumericError with a
// diagnostic dump if the loss stops being finite.
TrainResult train(Model& m, const TrainConfig& config, DataSource& data);

} // namespace ntc
