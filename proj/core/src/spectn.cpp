#include "sscnn/spectn.hpp"

#include <cmath>
#include <random>

#include "sscnn/errors.hpp"

namespace sscnn {

ad::Conv3dSpec SpecTNConfig::conv1() const {
    return ad::Conv3dSpec{resolution, k_local, conv1_channels, kernel, stride};
}

ad::Conv3dSpec SpecTNConfig::conv2() const {
    return ad::Conv3dSpec{conv1().out_res(), conv1_channels, conv2_channels, kernel, stride};
}

int SpecTNConfig::flat_size() const {
    const int r = conv2().out_res();
    return r * r * r * conv2_channels;
}

namespace {

Matrix glorot(int rows, int cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

}  // namespace

void SpecTN::init_params(ParamStore& params, std::uint64_t seed) const {
    if (config_.conv1().out_res() < 1 || config_.conv2().out_res() < 1)
        throw BadSpecError("spectn: voxel resolution too small for two conv stages");
    std::mt19937_64 rng(seed);
    const auto c1 = config_.conv1();
    const auto c2 = config_.conv2();
    params["spectn.conv1.weight"] = glorot(c1.patch_size(), c1.out_channels, rng);
    params["spectn.conv1.bias"] = Matrix::Zero(1, c1.out_channels);
    params["spectn.conv2.weight"] = glorot(c2.patch_size(), c2.out_channels, rng);
    params["spectn.conv2.bias"] = Matrix::Zero(1, c2.out_channels);
    params["spectn.fc.weight"] = glorot(config_.flat_size(), config_.hidden, rng);
    params["spectn.fc.bias"] = Matrix::Zero(1, config_.hidden);
    // Zero-initialized output: the network starts by predicting C = 0, so
    // early pretraining updates are dominated by the C_pre targets.
    params["spectn.out.weight"] =
        Matrix::Zero(config_.hidden, config_.k_canon * config_.k_local);
    params["spectn.out.bias"] = Matrix::Zero(1, config_.k_canon * config_.k_local);
}

ad::Var SpecTN::forward(ad::Tape& tape, const ParamStore& params,
                        const Matrix& voxel_values) const {
    const int cells = config_.resolution * config_.resolution * config_.resolution;
    if (voxel_values.rows() != cells || voxel_values.cols() != config_.k_local)
        throw ShapeMismatch("spectn: expected " + std::to_string(cells) + " x " +
                            std::to_string(config_.k_local) + " voxel basis input");

    const auto p = [&](const std::string& name) -> ad::Var {
        auto it = params.find(name);
        if (it == params.end()) throw ShapeMismatch("spectn: missing parameter " + name);
        return tape.param(name, it->second);
    };

    ad::Var h = tape.constant(voxel_values);
    h = tape.relu(tape.conv3d(h, p("spectn.conv1.weight"), p("spectn.conv1.bias"),
                              config_.conv1()));
    h = tape.relu(tape.conv3d(h, p("spectn.conv2.weight"), p("spectn.conv2.bias"),
                              config_.conv2()));
    h = tape.reshape(h, 1, config_.flat_size());
    h = tape.relu(tape.add_rowvec(tape.matmul(h, p("spectn.fc.weight")), p("spectn.fc.bias")));
    h = tape.add_rowvec(tape.matmul(h, p("spectn.out.weight")), p("spectn.out.bias"));
    return tape.reshape(h, config_.k_canon, config_.k_local);
}

FunctionalMap SpecTN::predict(const ParamStore& params, const Matrix& voxel_values) const {
    ad::Tape tape;
    ad::Var c = forward(tape, params, voxel_values);
    return FunctionalMap{tape.value(c)};
}

}  // namespace sscnn
