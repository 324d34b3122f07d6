// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/transform.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ntc {

// Checkpoint container: magic "NTCK", u32-LE version 1, u32-LE entry count,
// then per entry u16-LE name length + UTF-8 name, u8 rank, u32-LE extents,
// payload of f64-LE values. Round trips are bit-exact.

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void write_tensor_file(const std::string& path, const NamedTensors& entries);
NamedTensors read_tensor_file(const std::string& path); // throws ParseError

void save_checkpoint(const Model& m, const std::string& path);

// Rebuilds a model from a self-describing checkpoint; the expected-config
// overload additionally rejects mismatched geometry with a shape diagnostic.
Model load_checkpoint(const std::string& path);
Model load_checkpoint(const std::string& path, const TransformConfig& expected);

} // namespace ntc
