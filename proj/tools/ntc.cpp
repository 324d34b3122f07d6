// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness: verification suite, optimizer-conditioning benchmark,
// toy-scale training and evaluation. Exit codes: 0 success, 1 check/eval
// failure, 2 usage or configuration error, 3 numerical abort.

#include "ntc/cli_commands.hpp"
#include "ntc/error.hpp"
#include "ntc/kernels.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"ntc - nonlinear transform coding toolkit"};
    app.require_subcommand(1);

    // gradcheck
    std::uint64_t gc_seed = 1;
    std::size_t gc_trials = 100;
    bool gc_inject_fault = false;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "run the analytic-vs-oracle check suite");
    gradcheck->add_option("--seed", gc_seed, "random seed");
    gradcheck->add_option("--trials", gc_trials, "random trials per check")
        ->check(CLI::PositiveNumber);
    gradcheck->add_flag("--inject-fault", gc_inject_fault,
                        "negative control: corrupt one gradient to force a failure");

    // bench-opt
    ntc::BenchConfig bench;
    std::string bench_optimizer = "adam";
    std::string bench_out = "bench.csv";
    CLI::App* bench_opt =
        app.add_subcommand("bench-opt", "filter-recovery conditioning benchmark on pink noise");
    bench_opt->add_option("--optimizer", bench_optimizer, "sgd | whitened-sgd | adam | sadam")
        ->required();
    bench_opt->add_option("--rho", bench.rho, "step size")->check(CLI::PositiveNumber);
    bench_opt->add_option("--steps", bench.steps, "descent steps")->check(CLI::PositiveNumber);
    bench_opt->add_option("--seed", bench.seed, "random seed");
    bench_opt->add_option("--batch", bench.batch, "patches per step")->check(CLI::PositiveNumber);
    bench_opt->add_option("--interval", bench.log_interval, "logging interval")
        ->check(CLI::PositiveNumber);
    bench_opt->add_option("--kernel", bench.kernel, "filter support")->check(CLI::PositiveNumber);
    bench_opt->add_option("--out", bench_out, "output CSV path")->required();
    bench_opt->add_flag("--whiten-identity", bench.whiten_identity,
                        "test fixture: use P = I instead of estimating the whitener");

    // train
    std::string train_config_path;
    CLI::App* train = app.add_subcommand("train", "train a toy rate-distortion model");
    train->add_option("--config", train_config_path, "key = value configuration file")->required();

    // eval
    ntc::cli::EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on PPM/PGM images");
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "model checkpoint")->required();
    eval_cmd->add_option("--images", eval.images_glob, "image path or glob")->required();
    eval_cmd->add_option("--out", eval.out_file, "output CSV path")->required();
    eval_cmd->add_option("--dump-latents", eval.dump_latents_file,
                         "write rounded latents and density parameters to FILE");
    eval_cmd->add_option("--dump-recon", eval.dump_recon_dir, "write reconstructions to DIR");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gradcheck->parsed())
            return ntc::cli::cmd_gradcheck(gc_seed, gc_trials, gc_inject_fault, std::cout);
        if (bench_opt->parsed()) {
            bench.optimizer = ntc::bench_optimizer_from_name(bench_optimizer);
            return ntc::cli::cmd_bench_opt(bench, bench_out, std::cout);
        }
        if (train->parsed()) {
            const ntc::RunConfig config = ntc::parse_run_config_file(train_config_path);
            return ntc::cli::cmd_train(config, std::cout);
        }
        if (eval_cmd->parsed()) return ntc::cli::cmd_eval(eval, std::cout);
    } catch (const ntc::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ntc::NumericError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 2;
}
