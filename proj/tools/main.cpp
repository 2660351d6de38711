#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "sscnn/config.hpp"
#include "sscnn/errors.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    int64_t seed = -1;
    int jobs = -1;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file");
    cmd->add_option("--seed", flags.seed, "override train.seed");
    cmd->add_option("--jobs", flags.jobs, "parallel workers for precompute commands");
    cmd->add_option("--out", flags.out_dir, "override output.dir");
}

sscnn::RunConfig resolve(const CommonFlags& flags) {
    sscnn::ConfigFile file;
    if (!flags.config_path.empty()) file = sscnn::ConfigFile::load(flags.config_path);
    sscnn::RunConfig config = sscnn::RunConfig::from_file(file);
    if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.jobs >= 1) config.jobs = flags.jobs;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SyncSpecCNN: spectral graph CNN workflow driver"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string predict_shape;
    sscnn::cli::PlotKernelFlags plot;
    std::vector<double> ratios{1.0, 0.75, 0.5, 0.25};

    CLI::App* build_basis =
        app.add_subcommand("build-basis", "compute and cache spectral bases per shape");
    add_common(build_basis, flags);

    CLI::App* precompute = app.add_subcommand(
        "precompute-fmap", "build average shapes and precomputed functional maps");
    add_common(precompute, flags);

    CLI::App* pretrain = app.add_subcommand(
        "pretrain-spectn", "supervise the spectral transformer on precomputed maps");
    add_common(pretrain, flags);

    CLI::App* train = app.add_subcommand("train", "train the model on the train split");
    add_common(train, flags);

    CLI::App* eval = app.add_subcommand("eval", "evaluate the checkpoint on the test split");
    add_common(eval, flags);

    CLI::App* predict =
        app.add_subcommand("predict", "predict labels/normals for a single shape");
    add_common(predict, flags);
    predict->add_option("--shape", predict_shape, "dataset key or .pts path")->required();

    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "finite-difference check of all gradients on a tiny model");
    add_common(gradcheck, flags);

    CLI::App* plot_kernel =
        app.add_subcommand("plot-kernel", "export spectral and spatial kernel profiles");
    add_common(plot_kernel, flags);
    plot_kernel->add_option("--gamma", plot.gamma, "dilation parameter");
    plot_kernel->add_option("--kind", plot.kind, "kernel kind override");
    plot_kernel->add_option("--params", plot.params, "comma-separated kernel coefficients");
    plot_kernel->add_option("--basis", plot.basis_path, "basis cache file (.basis)");
    plot_kernel->add_option("--center", plot.center, "center vertex id");

    CLI::App* downsample = app.add_subcommand(
        "downsample-eval", "evaluate segmentation under point-cloud downsampling");
    add_common(downsample, flags);
    downsample->add_option("--ratios", ratios, "downsample ratios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const sscnn::RunConfig config = resolve(flags);
        if (build_basis->parsed()) return sscnn::cli::cmd_build_basis(config);
        if (precompute->parsed()) return sscnn::cli::cmd_precompute_fmap(config);
        if (pretrain->parsed()) return sscnn::cli::cmd_pretrain_spectn(config);
        if (train->parsed()) return sscnn::cli::cmd_train(config);
        if (eval->parsed()) return sscnn::cli::cmd_eval(config);
        if (predict->parsed()) return sscnn::cli::cmd_predict(config, predict_shape);
        if (gradcheck->parsed()) return sscnn::cli::cmd_gradcheck(config);
        if (plot_kernel->parsed()) return sscnn::cli::cmd_plot_kernel(config, plot);
        if (downsample->parsed()) return sscnn::cli::cmd_downsample_eval(config, ratios);
    } catch (const sscnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
