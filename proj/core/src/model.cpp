#include "sscnn/model.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "sscnn/errors.hpp"

namespace sscnn {

bool ModelConfig::any_spectn() const {
    return std::any_of(layers.begin(), layers.end(),
                       [](const LayerConfig& l) { return l.uses_spectn; });
}

int ModelConfig::channels_into(int index) const {
    if (index <= 1) return input_channels;
    return layers[index - 2].out_channels;
}

int ModelConfig::mix_input_channels(int index) const {
    int channels = channels_into(index);
    if (index == skip_destination)
        for (int src : skip_sources) channels += layers[src - 1].out_channels;
    return channels;
}

void ModelConfig::validate() const {
    if (layers.empty()) throw BadSpecError("model has no layers");
    if (input_channels < 1) throw BadSpecError("input_channels must be >= 1");
    for (size_t i = 0; i < layers.size(); ++i) {
        const LayerConfig& l = layers[i];
        if (l.index != static_cast<int>(i) + 1)
            throw BadSpecError("layer indices must be 1..L in order");
        if (l.dilation <= 0) throw BadSpecError("dilation must be positive");
        if (l.kernel_param_count < 1) throw BadSpecError("kernel_param_count must be >= 1");
        if (l.out_channels < 1) throw BadSpecError("out_channels must be >= 1");
        if (l.uses_spectn && l.kernel_param_count != spectn.k_canon)
            throw BadSpecError("synchronized layers need k_canon kernel parameters");
    }
    for (int src : skip_sources) {
        if (src < 1 || src > static_cast<int>(layers.size()) || src >= skip_destination)
            throw BadSpecError("skip sources must precede the destination layer");
    }
    if (!skip_sources.empty() &&
        (skip_destination < 1 || skip_destination > static_cast<int>(layers.size())))
        throw BadSpecError("skip destination out of range");
    if (head.kind == HeadKind::Normals && head.output_dim != 3)
        throw BadSpecError("normals head must have output_dim 3");
    if (head.output_dim < 1) throw BadSpecError("head output_dim must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw BadSpecError("dropout_rate must be in [0, 1)");
}

ModelConfig paper10_preset(int c, int input_channels, HeadConfig head) {
    ModelConfig config;
    config.input_channels = input_channels;
    config.head = head;
    const double dilation[10] = {1, 1, 4, 4, 16, 16, 64, 64, 1, 1};
    const bool spectn[10] = {false, false, false, false, false,
                             false, true,  true,  false, false};
    const int params[10] = {7, 1, 7, 1, 7, 1, 45, 45, 7, 1};
    const int width[10] = {c, c, c, c, 2 * c, 2 * c, 2 * c, 2 * c, 2 * c, 2 * c};
    for (int i = 0; i < 10; ++i)
        config.layers.push_back(
            LayerConfig{i + 1, dilation[i], spectn[i], params[i], width[i]});
    config.spectn.k_local = 15;
    config.spectn.k_canon = 45;
    config.validate();
    return config;
}

ModelConfig paper10_tiny_preset(int c, int input_channels, HeadConfig head) {
    ModelConfig config = paper10_preset(c, input_channels, head);
    config.spectn.resolution = 8;
    config.spectn.k_local = 4;
    config.spectn.k_canon = 8;
    config.spectn.conv1_channels = 4;
    config.spectn.conv2_channels = 8;
    config.spectn.hidden = 8;
    for (LayerConfig& l : config.layers)
        if (l.uses_spectn) l.kernel_param_count = config.spectn.k_canon;
    config.validate();
    return config;
}

ModelConfig small_kernel_ablation(const ModelConfig& base) {
    ModelConfig config = base;
    for (LayerConfig& l : config.layers) {
        l.dilation = 1.0;
        if (l.uses_spectn) {
            l.uses_spectn = false;
            l.kernel_param_count = 7;
        }
    }
    config.validate();
    return config;
}

ModelConfig linear_preset(int channels, int kernel_params) {
    ModelConfig config;
    config.input_channels = channels;
    config.layers.push_back(LayerConfig{1, 1.0, false, kernel_params, channels});
    config.head = HeadConfig{HeadKind::Segmentation, channels};
    config.use_batch_norm = false;
    config.use_relu = false;
    config.dropout_rate = 0.0;
    config.skip_sources.clear();
    config.skip_destination = 0;
    config.validate();
    return config;
}

std::string to_string(HeadKind kind) {
    switch (kind) {
        case HeadKind::Segmentation: return "segmentation";
        case HeadKind::Keypoint: return "keypoint";
        case HeadKind::Normals: return "normals";
    }
    return "?";
}

namespace {

HeadKind head_kind_from_string(const std::string& name) {
    if (name == "segmentation") return HeadKind::Segmentation;
    if (name == "keypoint") return HeadKind::Keypoint;
    if (name == "normals") return HeadKind::Normals;
    throw BadSpecError("unknown head kind '" + name + "'");
}

std::string join_ints(const std::vector<int>& values) {
    std::ostringstream os;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) os << ",";
        os << values[i];
    }
    return os.str();
}

std::vector<int> split_ints(const std::string& text) {
    std::vector<int> out;
    std::istringstream is(text);
    std::string token;
    while (std::getline(is, token, ',')) {
        if (!token.empty()) out.push_back(std::stoi(token));
    }
    return out;
}

}  // namespace

std::string describe(const ModelConfig& config) {
    std::ostringstream os;
    os << "SyncSpecCNN model\n";
    os << "input_channels = " << config.input_channels << "\n";
    os << "head = " << to_string(config.head.kind) << "(" << config.head.output_dim << ")\n";
    os << "kernel = " << to_string(config.kernel_kind) << "\n";
    os << "dropout = " << config.dropout_rate << "\n";
    os << "batch_norm = " << (config.use_batch_norm ? "on" : "off") << "\n";
    os << "relu = " << (config.use_relu ? "on" : "off") << "\n";
    os << "skip = " << join_ints(config.skip_sources) << " -> "
       << config.skip_destination << "\n";
    os << "sync = r" << config.spectn.resolution << " local" << config.spectn.k_local
       << " canon" << config.spectn.k_canon << " conv" << config.spectn.conv1_channels
       << "," << config.spectn.conv2_channels << " k" << config.spectn.kernel << "s"
       << config.spectn.stride << " hidden" << config.spectn.hidden << "\n";
    os << "layer dilation spectn kernel_params out_channels\n";
    for (const LayerConfig& l : config.layers)
        os << l.index << " " << l.dilation << " " << (l.uses_spectn ? "yes" : "no") << " "
           << l.kernel_param_count << " " << l.out_channels << "\n";
    return os.str();
}

ModelConfig parse_model_description(const std::string& text) {
    ModelConfig config;
    config.layers.clear();
    config.skip_sources.clear();
    std::istringstream is(text);
    std::string line;
    bool in_table = false;
    const auto value_of = [](const std::string& l) {
        const auto eq = l.find('=');
        if (eq == std::string::npos) throw BadSpecError("bad model description line: " + l);
        std::string v = l.substr(eq + 1);
        const auto start = v.find_first_not_of(' ');
        return start == std::string::npos ? std::string() : v.substr(start);
    };
    while (std::getline(is, line)) {
        if (line.empty() || line == "SyncSpecCNN model") continue;
        if (line.rfind("layer dilation", 0) == 0) {
            in_table = true;
            continue;
        }
        if (in_table) {
            std::istringstream row(line);
            LayerConfig l;
            std::string flag;
            row >> l.index >> l.dilation >> flag >> l.kernel_param_count >> l.out_channels;
            if (row.fail()) throw BadSpecError("bad layer row: " + line);
            l.uses_spectn = (flag == "yes");
            config.layers.push_back(l);
            continue;
        }
        if (line.rfind("input_channels", 0) == 0) {
            config.input_channels = std::stoi(value_of(line));
        } else if (line.rfind("head", 0) == 0) {
            const std::string v = value_of(line);
            const auto open = v.find('(');
            const auto close = v.find(')');
            if (open == std::string::npos || close == std::string::npos)
                throw BadSpecError("bad head spec: " + v);
            config.head.kind = head_kind_from_string(v.substr(0, open));
            config.head.output_dim = std::stoi(v.substr(open + 1, close - open - 1));
        } else if (line.rfind("kernel", 0) == 0) {
            config.kernel_kind = kernel_kind_from_string(value_of(line));
        } else if (line.rfind("dropout", 0) == 0) {
            config.dropout_rate = std::stod(value_of(line));
        } else if (line.rfind("batch_norm", 0) == 0) {
            config.use_batch_norm = value_of(line) == "on";
        } else if (line.rfind("relu", 0) == 0) {
            config.use_relu = value_of(line) == "on";
        } else if (line.rfind("skip", 0) == 0) {
            const std::string v = value_of(line);
            const auto arrow = v.find("->");
            if (arrow == std::string::npos) throw BadSpecError("bad skip spec: " + v);
            config.skip_sources = split_ints(v.substr(0, arrow));
            config.skip_destination = std::stoi(v.substr(arrow + 2));
        } else if (line.rfind("sync", 0) == 0) {
            const std::string v = value_of(line);
            SpecTNConfig& s = config.spectn;
            if (std::sscanf(v.c_str(), "r%d local%d canon%d conv%d,%d k%ds%d hidden%d",
                            &s.resolution, &s.k_local, &s.k_canon, &s.conv1_channels,
                            &s.conv2_channels, &s.kernel, &s.stride, &s.hidden) != 8)
                throw BadSpecError("bad sync spec: " + v);
        } else {
            throw BadSpecError("unrecognized model description line: " + line);
        }
    }
    if (!config.layers.empty()) config.validate();
    return config;
}

}  // namespace sscnn
