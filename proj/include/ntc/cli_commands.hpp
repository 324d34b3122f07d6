// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/bench.hpp"
#include "ntc/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace ntc::cli {

// Command bodies shared by the ntc binary and the integration tests. Return
// values are process exit codes: 0 success, 1 check/eval failure, 3 numerical
// abort. Configuration errors propagate as ConfigError (mapped to 2 by main).

int cmd_gradcheck(std::uint64_t seed, std::size_t trials, bool inject_fault, std::ostream& out);

int cmd_bench_opt(const BenchConfig& config, const std::string& out_file, std::ostream& log);

struct TrainOutputs {
    std::string metrics_csv;
    std::string checkpoint;
    std::string config_echo;
};

int cmd_train(const RunConfig& config, std::ostream& log, TrainOutputs* outputs = nullptr);

struct EvalOptions {
    std::string checkpoint;
    std::string images_glob;
    std::string out_file;
    std::string dump_latents_file; // optional
    std::string dump_recon_dir;    // optional
};

int cmd_eval(const EvalOptions& options, std::ostream& log);

void write_text_file(const std::string& path, const std::string& content);

} // namespace ntc::cli
