// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

#include <string>

namespace ntc {

// Binary netpbm readers: P6 (PPM) and P5 (PGM), 8-bit, maxval 255. Values are
// scaled to [0,1]. load_image replicates grayscale input to three channels;
// load_gray requires P5 and keeps one. Malformed files raise ParseError with
// the offending byte offset.
Tensor load_image(const std::string& path); // [3,H,W]
Tensor load_gray(const std::string& path);  // [1,H,W]

// P6 writer; values clamped to [0,1] and quantized to 8 bits.
void save_ppm(const std::string& path, const Tensor& image);

} // namespace ntc
