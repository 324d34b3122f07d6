// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/train.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ntc {

// Plain-text training configuration, one `key = value` per line, `#` comments.
// Every key is required; unknown keys are rejected.
struct RunConfig {
    std::size_t n_filters = 0;
    Nonlinearity nonlinearity = Nonlinearity::gdn;
    OptimizerKind optimizer = OptimizerKind::adam;
    double rho = 0.0;
    double lambda = 0.0;
    std::size_t steps = 0;
    std::size_t batch = 0;
    std::size_t patch_size = 0;
    std::uint64_t seed = 0;
    std::string data;    // path glob or "pink"
    std::string out_dir;

    TrainConfig train_config() const;
};

RunConfig parse_run_config(std::istream& in);              // throws ConfigError
RunConfig parse_run_config_file(const std::string& path);  // throws ConfigError
std::string echo_config(const RunConfig& c);               // fully resolved text

// Expands a path pattern with * and ? wildcards in the filename part;
// literal paths pass through. Results are sorted.
std::vector<std::string> expand_glob(const std::string& pattern);

} // namespace ntc
