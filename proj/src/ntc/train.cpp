// SPDX-License-Identifier: Apache-2.0

#include "ntc/train.hpp"

#include "ntc/error.hpp"
#include "ntc/pink.hpp"

#include <cmath>
#include <sstream>

namespace ntc {

OptimizerKind optimizer_from_name(std::string_view name) {
    if (name == "adam") return OptimizerKind::adam;
    if (name == "sadam") return OptimizerKind::sadam;
    throw ConfigError("unknown optimizer: " + std::string(name));
}

std::string_view optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::adam ? "adam" : "sadam";
}

Tensor PinkSource::next_patch(Rng& rng) {
    Tensor patch = gen_pink_patch(patch_size_, TransformConfig::kImageChannels, rng);
    for (std::size_t i = 0; i < patch.size(); ++i) {
        const double v = 0.5 + 0.2 * patch[i];
        patch[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return patch;
}

ImagePatchSource::ImagePatchSource(std::vector<Tensor> images, std::size_t patch_size)
    : images_(std::move(images)), patch_size_(patch_size) {
    require(!images_.empty(), "image source: no images");
    for (const Tensor& im : images_)
        require(im.extent(1) >= patch_size_ && im.extent(2) >= patch_size_,
                "image source: image smaller than the patch size");
}

Tensor ImagePatchSource::next_patch(Rng& rng) {
    const Tensor& im = images_[static_cast<std::size_t>(rng.below(images_.size()))];
    const std::size_t h = im.extent(1), w = im.extent(2);
    const std::size_t i0 = static_cast<std::size_t>(rng.below(h - patch_size_ + 1));
    const std::size_t j0 = static_cast<std::size_t>(rng.below(w - patch_size_ + 1));
    Tensor out({TransformConfig::kImageChannels, patch_size_, patch_size_});
    for (std::size_t c = 0; c < TransformConfig::kImageChannels; ++c)
        for (std::size_t i = 0; i < patch_size_; ++i)
            for (std::size_t j = 0; j < patch_size_; ++j) out(c, i, j) = im(c, i0 + i, j0 + j);
    return out;
}

ModelOptimizer ModelOptimizer::make(Model& m, OptimizerKind kind, double rho) {
    ModelOptimizer opt;
    opt.kind = kind;
    AdamConfig cfg;
    cfg.rho = rho;
    for (const ParamRef& p : model_parameters(m)) {
        if (p.is_conv_kernel) {
            if (kind == OptimizerKind::sadam)
                opt.kernel_sadam.push_back(SadamState::make(p.tensor->shape(), cfg));
            else
                opt.kernel_adam.push_back(AdamState::make(p.tensor->shape(), cfg));
        } else {
            opt.other.push_back(AdamState::make(p.tensor->shape(), cfg));
        }
    }
    return opt;
}

void ModelOptimizer::step(Model& m, ModelGrads& grads) {
    std::vector<ParamRef> params = model_parameters(m);
    std::vector<ParamRef> gs = grad_parameters(grads);
    require(params.size() == gs.size(), "optimizer: parameter/grad enumeration mismatch");
    std::size_t ik = 0, io = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].is_conv_kernel) {
            if (kind == OptimizerKind::sadam)
                sadam_step(kernel_sadam[ik], *params[i].tensor, *gs[i].tensor);
            else
                adam_step(kernel_adam[ik], *params[i].tensor, *gs[i].tensor);
            ++ik;
        } else {
            adam_step(other[io], *params[i].tensor, *gs[i].tensor);
            ++io;
        }
    }
}

TrainResult train(Model& m, const TrainConfig& config, DataSource& data) {
    require(config.lambda >= 0.0, "train: lambda must be non-negative");
    require(config.rho > 0.0, "train: rho must be positive");
    require(config.batch >= 1, "train: batch must be >= 1");
    require(config.patch_size % TransformConfig::kTotalDownsampling == 0,
            "train: patch size must be divisible by 16");

    Rng rng(config.seed);
    ModelOptimizer opt = ModelOptimizer::make(m, config.optimizer, config.rho);

    TrainResult result;
    result.trajectory.reserve(config.steps);

    auto batch_loss = [&](ModelGrads* out_grads) {
        double loss = 0.0;
        for (std::size_t b = 0; b < config.batch; ++b) {
            const Tensor x = data.next_patch(rng);
            LossResult r = rd_loss(x, m, config.lambda, rng);
            loss += r.loss.total;
            if (out_grads) out_grads->accumulate(r.grads, 1.0 / static_cast<double>(config.batch));
        }
        return loss / static_cast<double>(config.batch);
    };

    for (std::size_t step = 1; step <= config.steps; ++step) {
        ModelGrads grads = ModelGrads::zeros_like(m);
        const double loss = batch_loss(&grads);
        if (!std::isfinite(loss)) {
            std::ostringstream dump;
            dump << "train: non-finite loss " << loss << " at step " << step
                 << " (seed " << config.seed << ", lambda " << config.lambda << ", rho "
                 << config.rho << ", optimizer " << optimizer_name(config.optimizer) << ")";
            throw NumericError(dump.str());
        }
        result.trajectory.push_back({step - 1, loss}); // loss before this update
        opt.step(m, grads);
    }

    result.final_loss = batch_loss(nullptr);
    return result;
}

std::vector<StepRecord> sampled_trajectory(const TrainResult& result, std::size_t interval,
                                           std::size_t steps) {
    require(interval >= 1, "sampled_trajectory: interval must be >= 1");
    std::vector<StepRecord> rows;
    for (const StepRecord& r : result.trajectory)
        if (r.step % interval == 0) rows.push_back(r);
    rows.push_back({steps, result.final_loss});
    return rows;
}

} // namespace ntc
