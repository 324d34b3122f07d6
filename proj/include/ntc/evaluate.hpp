// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/transform.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ntc {

struct EvalRecord {
    std::string name;
    double bpp = 0.0;
    double psnr = 0.0; // +infinity marks an exact reconstruction
    Tensor latents;    // rounded latent tensor, kept for dumps/cross-checks
};

struct EvalSummary {
    std::vector<EvalRecord> rows;
    std::vector<std::string> skipped; // unreadable inputs, with reasons
    double mean_bpp = 0.0;
    double mean_psnr = 0.0;
};

// Center-crops extents down to multiples of 16 when needed; unreadable or
// too-small images are skipped with a note and evaluation continues.
EvalSummary evaluate(const Model& m, const std::vector<std::string>& paths);

Tensor center_crop_to_multiple(const Tensor& image, std::size_t multiple);

// CSV with header image,bpp,psnr and a final MEAN row.
std::string format_eval_csv(const EvalSummary& summary);

// Latent dump consumed by the independent bpp cross-check: per image a header
// line, the channel parameters and the rounded latent values.
void dump_latents(const Model& m, const EvalSummary& summary, std::ostream& out);

} // namespace ntc
