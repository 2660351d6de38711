#pragma once

#include <string>
#include <vector>

#include "sscnn/config.hpp"

namespace sscnn::cli {

struct PlotKernelFlags {
    double gamma = 4.0;
    std::string kind;              // empty = take from config
    std::string params;            // comma-separated coefficients; empty = single window
    std::string basis_path;        // empty = built-in 200-vertex ring graph
    int center = 0;
};

// Each command returns a process exit code: 0 success, 1 runtime failure.
// Usage/config problems surface as ConfigError and map to exit code 2.
int cmd_build_basis(const RunConfig& config);
int cmd_precompute_fmap(const RunConfig& config);
int cmd_pretrain_spectn(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_predict(const RunConfig& config, const std::string& shape);
int cmd_gradcheck(const RunConfig& config);
int cmd_plot_kernel(const RunConfig& config, const PlotKernelFlags& flags);
int cmd_downsample_eval(const RunConfig& config, const std::vector<double>& ratios);

}  // namespace sscnn::cli
