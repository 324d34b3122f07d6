// SPDX-License-Identifier: Apache-2.0

#include "ntc/cli_commands.hpp"

#include "ntc/checkpoint.hpp"
#include "ntc/error.hpp"
#include "ntc/evaluate.hpp"
#include "ntc/gradcheck.hpp"
#include "ntc/pnm.hpp"
#include "ntc/train.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ntc::cli {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(path + ": write failed");
}

int cmd_gradcheck(std::uint64_t seed, std::size_t trials, bool inject_fault, std::ostream& out) {
    const CheckReport report = run_gradcheck(seed, trials, inject_fault);
    print_report(report, out);
    return report.all_pass ? 0 : 1;
}

int cmd_bench_opt(const BenchConfig& config, const std::string& out_file, std::ostream& log) {
    const BenchResult result = run_filter_recovery(config);
    write_text_file(out_file, format_step_csv(result.log));
    log << "bench-opt: " << bench_optimizer_name(config.optimizer) << " rho " << config.rho
        << " steps " << config.steps << " seed " << config.seed << " final loss "
        << result.final_loss << " -> " << out_file << "\n";
    return 0;
}

namespace {

constexpr std::size_t kTrainLogInterval = 100;

std::unique_ptr<DataSource> make_data_source(const RunConfig& config, std::ostream& log) {
    if (config.data == "pink")
        return std::make_unique<PinkSource>(config.patch_size);

    std::vector<Tensor> images;
    for (const std::string& path : expand_glob(config.data)) {
        try {
            Tensor im = load_image(path);
            if (im.extent(1) < config.patch_size || im.extent(2) < config.patch_size) {
                log << "warning: " << path << " smaller than the patch size, skipped\n";
                continue;
            }
            images.push_back(std::move(im));
        } catch (const Error& e) {
            log << "warning: " << e.what() << ", skipped\n";
        }
    }
    if (images.empty())
        throw ConfigError("config: data pattern '" + config.data + "' yields no usable images");
    return std::make_unique<ImagePatchSource>(std::move(images), config.patch_size);
}

} // namespace

int cmd_train(const RunConfig& config, std::ostream& log, TrainOutputs* outputs) {
    std::unique_ptr<DataSource> data = make_data_source(config, log);

    TransformConfig tcfg;
    tcfg.n_filters = config.n_filters;
    tcfg.kind = config.nonlinearity;
    Model model = build_model(tcfg, config.seed);

    TrainResult result;
    try {
        result = train(model, config.train_config(), *data);
    } catch (const NumericError& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    }

    fs::create_directories(config.out_dir);
    TrainOutputs paths;
    paths.metrics_csv = (fs::path(config.out_dir) / "metrics.csv").string();
    paths.checkpoint = (fs::path(config.out_dir) / "final.ntck").string();
    paths.config_echo = (fs::path(config.out_dir) / "config.echo").string();

    write_text_file(paths.metrics_csv,
                    format_step_csv(sampled_trajectory(result, kTrainLogInterval, config.steps)));
    save_checkpoint(model, paths.checkpoint);
    write_text_file(paths.config_echo, echo_config(config));

    log << "train: " << config.steps << " steps, final loss " << result.final_loss << " -> "
        << config.out_dir << "\n";
    if (outputs) *outputs = paths;
    return 0;
}

int cmd_eval(const EvalOptions& options, std::ostream& log) {
    Model model = load_checkpoint(options.checkpoint);

    const std::vector<std::string> paths = expand_glob(options.images_glob);
    if (paths.empty()) {
        log << "error: no files match '" << options.images_glob << "'\n";
        return 1;
    }

    const EvalSummary summary = evaluate(model, paths);
    for (const std::string& note : summary.skipped) log << "warning: " << note << ", skipped\n";
    if (summary.rows.empty()) {
        log << "error: no readable images\n";
        return 1;
    }

    write_text_file(options.out_file, format_eval_csv(summary));
    log << "eval: " << summary.rows.size() << " image(s), mean bpp " << summary.mean_bpp
        << ", mean psnr " << summary.mean_psnr << " -> " << options.out_file << "\n";

    if (!options.dump_latents_file.empty()) {
        std::ostringstream dump;
        dump_latents(model, summary, dump);
        write_text_file(options.dump_latents_file, dump.str());
    }
    if (!options.dump_recon_dir.empty()) {
        fs::create_directories(options.dump_recon_dir);
        for (const EvalRecord& r : summary.rows) {
            const Tensor recon = synthesis_forward(r.latents, model);
            const std::string name = fs::path(r.name).stem().string() + ".recon.ppm";
            save_ppm((fs::path(options.dump_recon_dir) / name).string(), recon);
        }
    }
    return 0;
}

} // namespace ntc::cli
