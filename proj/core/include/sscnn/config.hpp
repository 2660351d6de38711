#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "sscnn/kernels.hpp"
#include "sscnn/model.hpp"

namespace sscnn {

/// Flat "key = value" config with bracketed sections. Keys are addressed as
/// "section.key"; values before any section header live under "".
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::filesystem::path& path);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Everything a pipeline command needs, resolved from the config file plus
/// command-line overrides.
struct RunConfig {
    // [dataset]
    std::filesystem::path dataset_root;
    std::filesystem::path train_split;
    std::filesystem::path test_split;
    std::string task = "segmentation";   // segmentation | keypoint | normals
    int num_classes = 2;                 // part labels (or keypoints + 1)
    bool cross_category = false;
    std::string input_features = "xyz";  // xyz | xyz_normals

    // [graph]
    int knn = 6;
    int eigen_count = 100;
    int dense_threshold = 512;

    // [sync]
    int resolution = 32;
    int k_local = 15;
    int k_canon = 45;
    int num_averages = 1;
    double ortho_weight = 1e-2;
    int spectn_conv1 = 8;
    int spectn_conv2 = 16;
    int spectn_hidden = 128;

    // [model]
    std::string preset = "paper10";
    int channels = 50;
    double dropout = 0.2;
    std::string kernel = "modulated_exp_window";

    // [train]
    std::string optimizer = "adam";
    double learning_rate = 1e-3;
    int epochs = 100;
    int pretrain_epochs = 200;
    double pretrain_learning_rate = 1e-3;
    int checkpoint_every = 0;  // 0 = final only
    std::uint64_t seed = 1;

    // [output]
    std::filesystem::path out_dir = "out";

    int jobs = 1;

    /// Builds the model config implied by preset/channels/task settings.
    ModelConfig make_model() const;
    int input_channel_count() const;

    static RunConfig from_file(const ConfigFile& file);
    /// Validates paths that must exist before any command runs.
    void validate_dataset_paths() const;
};

}  // namespace sscnn
