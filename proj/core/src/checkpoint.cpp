#include "sscnn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "sscnn/errors.hpp"

namespace sscnn {

namespace {

constexpr const char* kMagic = "SSCNN-CKPT v1";

void write_tensor(std::ostream& os, const std::string& name, const Matrix& value) {
    os << "tensor " << name << " 2 " << value.rows() << " " << value.cols() << "\n";
    // Row-major float64 payload.
    for (int i = 0; i < value.rows(); ++i)
        for (int j = 0; j < value.cols(); ++j) {
            const double d = value(i, j);
            os.write(reinterpret_cast<const char*>(&d), sizeof(double));
        }
    os << "\n";
}

bool read_tensor(std::istream& is, std::string& name, Matrix& value) {
    std::string line;
    if (!std::getline(is, line)) return false;
    if (line.empty()) return false;
    std::istringstream head(line);
    std::string tag;
    int rank = 0;
    long rows = 0, cols = 0;
    head >> tag >> name >> rank >> rows >> cols;
    if (tag != "tensor" || rank != 2 || head.fail())
        throw IoError("bad tensor record: " + line);
    value.resize(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            double d = 0.0;
            is.read(reinterpret_cast<char*>(&d), sizeof(double));
            if (!is) throw IoError("truncated tensor payload for " + name);
            value(i, j) = d;
        }
    char newline = 0;
    is.read(&newline, 1);
    if (newline != '\n') throw IoError("missing payload terminator for " + name);
    return true;
}

void write_store(std::ostream& os, const ParamStore& params, std::int64_t step) {
    os << kMagic << "\n";
    os << "step " << step << "\n";
    os << "tensors " << params.size() << "\n";
    for (const auto& [name, value] : params) write_tensor(os, name, value);
}

ParamStore read_store(std::istream& is, std::int64_t& step) {
    std::string line;
    if (!std::getline(is, line) || line != kMagic)
        throw IoError("not a checkpoint file (bad magic)");
    if (!std::getline(is, line) || line.rfind("step ", 0) != 0)
        throw IoError("checkpoint missing step counter");
    step = std::stoll(line.substr(5));
    if (!std::getline(is, line) || line.rfind("tensors ", 0) != 0)
        throw IoError("checkpoint missing tensor count");
    const size_t count = std::stoul(line.substr(8));
    ParamStore params;
    for (size_t i = 0; i < count; ++i) {
        std::string name;
        Matrix value;
        if (!read_tensor(is, name, value)) throw IoError("truncated checkpoint");
        params[name] = std::move(value);
    }
    return params;
}

}  // namespace

void save_params(const std::string& path, const ParamStore& params, std::int64_t step) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "config_none\n";
    write_store(os, params, step);
    if (!os) throw IoError("failed writing " + path);
}

ParamStore load_params(const std::string& path, std::int64_t* step) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "config_none")
        throw IoError(path + " holds a full model checkpoint, not bare parameters");
    std::int64_t s = 0;
    ParamStore params = read_store(is, s);
    if (step) *step = s;
    return params;
}

void save_checkpoint(const std::string& path, const Network& net) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    const std::string description = describe(net.config());
    os << "config_begin\n" << description;
    os << "config_end\n";

    ParamStore all = net.params();
    const auto& states = net.bn_states();
    for (size_t i = 0; i < states.size(); ++i) {
        if (!states[i].initialized) continue;
        const std::string prefix = "state.layer" + std::to_string(i + 1) + ".bn.";
        all[prefix + "mean"] = states[i].running_mean.transpose();
        all[prefix + "var"] = states[i].running_var.transpose();
    }
    write_store(os, all, net.step());
    if (!os) throw IoError("failed writing " + path);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "config_begin")
        throw IoError(path + ": expected config block");
    std::ostringstream description;
    while (std::getline(is, line) && line != "config_end") description << line << "\n";

    Network net(parse_model_description(description.str()));
    std::int64_t step = 0;
    ParamStore all = read_store(is, step);

    ParamStore params;
    for (auto& [name, value] : all) {
        if (name.rfind("state.layer", 0) == 0) {
            const auto dot = name.find(".bn.");
            const int layer = std::stoi(name.substr(11, dot - 11));
            auto& state = net.bn_states().at(layer - 1);
            state.initialized = true;
            if (name.ends_with(".mean"))
                state.running_mean = value.row(0).transpose();
            else
                state.running_var = value.row(0).transpose();
        } else {
            params[name] = std::move(value);
        }
    }
    net.params() = std::move(params);
    net.step() = step;
    return net;
}

}  // namespace sscnn
