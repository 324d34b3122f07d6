// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ntc {

// 1/f-amplitude noise field synthesized by spectral shaping: independent
// Gaussian RDFT coefficients with amplitude 1/max(f,1) at radial frequency f,
// rotated to the spatial domain. Raw field, full rank across pixels.
Tensor gen_pink_field(std::size_t size, Rng& rng); // [size,size]

// Stacked raw fields normalized to zero mean and unit variance per patch.
Tensor gen_pink_patch(std::size_t size, std::size_t channels, Rng& rng);

std::vector<Tensor> gen_pink_patches(std::size_t count, std::size_t size, std::uint64_t seed,
                                     std::size_t channels = 3);

} // namespace ntc
