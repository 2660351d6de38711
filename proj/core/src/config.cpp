#include "sscnn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sscnn/errors.hpp"

namespace sscnn {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile config;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        config.entries_[section.empty() ? key : section + "." + key] = value;
    }
    return config;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse(buffer.str());
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
    }
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + it->second + "'");
    }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    if (it->second == "true" || it->second == "on" || it->second == "1") return true;
    if (it->second == "false" || it->second == "off" || it->second == "0") return false;
    throw ConfigError(key + ": expected a boolean, got '" + it->second + "'");
}

void ConfigFile::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

RunConfig RunConfig::from_file(const ConfigFile& file) {
    RunConfig rc;
    rc.dataset_root = file.get("dataset.root", "");
    rc.train_split = file.get("dataset.train_split", "");
    rc.test_split = file.get("dataset.test_split", "");
    rc.task = file.get("dataset.task", rc.task);
    rc.num_classes = file.get_int("dataset.num_classes", rc.num_classes);
    rc.cross_category = file.get_bool("dataset.cross_category", rc.cross_category);
    rc.input_features = file.get("dataset.input", rc.input_features);

    rc.knn = file.get_int("graph.k", rc.knn);
    rc.eigen_count = file.get_int("graph.m", rc.eigen_count);
    rc.dense_threshold = file.get_int("graph.dense_threshold", rc.dense_threshold);

    rc.resolution = file.get_int("sync.resolution", rc.resolution);
    rc.k_local = file.get_int("sync.k_local", rc.k_local);
    rc.k_canon = file.get_int("sync.k_canon", rc.k_canon);
    rc.num_averages = file.get_int("sync.num_averages", rc.num_averages);
    rc.ortho_weight = file.get_double("sync.ortho_weight", rc.ortho_weight);
    rc.spectn_conv1 = file.get_int("sync.spectn_conv1", rc.spectn_conv1);
    rc.spectn_conv2 = file.get_int("sync.spectn_conv2", rc.spectn_conv2);
    rc.spectn_hidden = file.get_int("sync.spectn_hidden", rc.spectn_hidden);

    rc.preset = file.get("model.preset", rc.preset);
    rc.channels = file.get_int("model.c", rc.channels);
    rc.dropout = file.get_double("model.dropout", rc.dropout);
    rc.kernel = file.get("model.kernel", rc.kernel);

    rc.optimizer = file.get("train.optimizer", rc.optimizer);
    rc.learning_rate = file.get_double("train.lr", rc.learning_rate);
    rc.epochs = file.get_int("train.epochs", rc.epochs);
    rc.pretrain_epochs = file.get_int("train.pretrain_epochs", rc.pretrain_epochs);
    rc.pretrain_learning_rate =
        file.get_double("train.pretrain_lr", rc.pretrain_learning_rate);
    rc.checkpoint_every = file.get_int("train.checkpoint_every", rc.checkpoint_every);
    rc.seed = static_cast<std::uint64_t>(file.get_int("train.seed", static_cast<int>(rc.seed)));

    rc.out_dir = file.get("output.dir", rc.out_dir.string());

    if (rc.knn < 1) throw ConfigError("graph.k must be >= 1");
    if (rc.eigen_count < 1 || rc.eigen_count > 100)
        throw ConfigError("graph.m must be in [1, 100]");
    if (rc.resolution < 2) throw ConfigError("sync.resolution must be >= 2");
    if (rc.k_local < 1 || rc.k_canon < rc.k_local)
        throw ConfigError("sync requires 1 <= k_local <= k_canon");
    if (rc.num_averages < 1) throw ConfigError("sync.num_averages must be >= 1");
    if (rc.task != "segmentation" && rc.task != "keypoint" && rc.task != "normals")
        throw ConfigError("dataset.task must be segmentation, keypoint or normals");
    if (rc.epochs < 0 || rc.pretrain_epochs < 0)
        throw ConfigError("epoch counts must be >= 0");
    return rc;
}

void RunConfig::validate_dataset_paths() const {
    namespace fs = std::filesystem;
    if (dataset_root.empty() || !fs::is_directory(dataset_root))
        throw ConfigError("dataset.root '" + dataset_root.string() + "' does not exist");
    if (!train_split.empty() && !fs::is_regular_file(train_split))
        throw ConfigError("dataset.train_split '" + train_split.string() + "' does not exist");
    if (!test_split.empty() && !fs::is_regular_file(test_split))
        throw ConfigError("dataset.test_split '" + test_split.string() + "' does not exist");
}

int RunConfig::input_channel_count() const {
    if (input_features == "xyz") return 3;
    if (input_features == "xyz_normals") return 6;
    throw ConfigError("dataset.input must be xyz or xyz_normals");
}

ModelConfig RunConfig::make_model() const {
    HeadConfig head;
    if (task == "segmentation") {
        head = HeadConfig{HeadKind::Segmentation, num_classes};
    } else if (task == "keypoint") {
        head = HeadConfig{HeadKind::Keypoint, num_classes};
    } else {
        head = HeadConfig{HeadKind::Normals, 3};
    }

    ModelConfig model;
    if (preset == "paper10") {
        model = paper10_preset(channels, input_channel_count(), head);
    } else if (preset == "paper10-tiny") {
        model = paper10_tiny_preset(channels, input_channel_count(), head);
    } else if (preset == "paper10-small") {
        model = small_kernel_ablation(paper10_preset(channels, input_channel_count(), head));
    } else {
        throw ConfigError("model.preset must be paper10, paper10-tiny or paper10-small");
    }
    model.dropout_rate = dropout;
    model.kernel_kind = kernel_kind_from_string(kernel);
    if (preset != "paper10-tiny") {
        model.spectn.resolution = resolution;
        model.spectn.k_local = k_local;
        model.spectn.conv1_channels = spectn_conv1;
        model.spectn.conv2_channels = spectn_conv2;
        model.spectn.hidden = spectn_hidden;
        const int canonical_total = k_canon * num_averages;
        model.spectn.k_canon = canonical_total;
        for (LayerConfig& layer : model.layers)
            if (layer.uses_spectn) layer.kernel_param_count = canonical_total;
    }
    model.validate();
    return model;
}

}  // namespace sscnn
