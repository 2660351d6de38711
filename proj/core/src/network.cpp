#include "sscnn/network.hpp"

#include <cmath>
#include <random>

#include "sscnn/errors.hpp"
#include "sscnn/spectn.hpp"

namespace sscnn {

NonFiniteActivation::NonFiniteActivation(int layer)
    : Error("non-finite activation in layer " + std::to_string(layer)), layer_index(layer) {}

MissingPrerequisite::MissingPrerequisite(const std::string& artifact,
                                         const std::string& producer)
    : Error("missing prerequisite: " + artifact + " (produce it with " + producer + ")") {}

std::string layer_param_name(int layer_index, const std::string& tensor) {
    return "layer" + std::to_string(layer_index) + "." + tensor;
}

Network::Network(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    bn_states_.resize(config_.layers.size());
}

void Network::init_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto glorot = [&](int rows, int cols) {
        const double bound = std::sqrt(6.0 / (rows + cols));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
        return m;
    };

    params_.clear();
    bn_states_.assign(config_.layers.size(), ad::BatchNormState{});
    step_ = 0;

    for (const LayerConfig& layer : config_.layers) {
        const int d_in = config_.channels_into(layer.index);
        // Kernels start near the identity filter (m == 1) with a little
        // symmetry-breaking noise. Synchronized layers hold free canonical
        // multipliers, which also start at one.
        Vector base;
        if (layer.uses_spectn) {
            base = Vector::Ones(layer.kernel_param_count);
        } else {
            base = KernelSpec::for_param_count(config_.kernel_kind, layer.dilation,
                                               layer.kernel_param_count)
                       .coeffs;
        }
        Matrix kernel(layer.kernel_param_count, d_in);
        for (int j = 0; j < d_in; ++j)
            for (int i = 0; i < layer.kernel_param_count; ++i)
                kernel(i, j) = base[i] + 0.01 * noise(rng);
        params_[layer_param_name(layer.index, "kernel")] = std::move(kernel);

        const int mix_in = config_.mix_input_channels(layer.index);
        params_[layer_param_name(layer.index, "mix.weight")] =
            glorot(mix_in, layer.out_channels);
        params_[layer_param_name(layer.index, "mix.bias")] =
            Matrix::Zero(1, layer.out_channels);
        if (config_.use_batch_norm) {
            params_[layer_param_name(layer.index, "bn.gamma")] =
                Matrix::Ones(1, layer.out_channels);
            params_[layer_param_name(layer.index, "bn.beta")] =
                Matrix::Zero(1, layer.out_channels);
        }
    }
    const int last_channels = config_.layers.back().out_channels;
    params_["head.weight"] = glorot(last_channels, config_.head.output_dim);
    params_["head.bias"] = Matrix::Zero(1, config_.head.output_dim);

    if (config_.any_spectn()) SpecTN(config_.spectn).init_params(params_, seed ^ 0x5eedULL);
}

ForwardResult Network::forward(ad::Tape& tape, const SpectralBasis& basis,
                               const FmapContext& fmap, const VertexSignal& signal,
                               RunMode mode, std::uint64_t dropout_seed) const {
    if (signal.cols() != config_.input_channels)
        throw ShapeMismatch("forward: expected " + std::to_string(config_.input_channels) +
                            " input channels, got " + std::to_string(signal.cols()));
    if (signal.rows() != basis.n())
        throw DimensionMismatch("forward: signal rows do not match basis size");
    const int m = basis.count();
    const bool training = mode != RunMode::Eval;
    const bool live_norm_stats = mode == RunMode::Train;

    const auto p = [&](const std::string& name) -> ad::Var {
        auto it = params_.find(name);
        if (it == params_.end()) throw ShapeMismatch("missing parameter " + name);
        return tape.param(name, it->second);
    };

    ForwardResult result;
    if (config_.any_spectn()) {
        if (fmap.voxel_values == nullptr)
            throw MissingPrerequisite("voxelized eigenbasis for synchronized layers",
                                      "precompute-fmap");
        result.fmap = SpecTN(config_.spectn).forward(tape, params_, *fmap.voxel_values);
    }

    ad::Var h = tape.constant(signal);
    std::vector<ad::Var> activations(config_.layers.size() + 1);
    for (const LayerConfig& layer : config_.layers) {
        const int layer_slot = layer.index - 1;

        // Spectral convolution: transform, filter (optionally in the
        // synchronized canonical domain), transform back. Depthwise: each
        // input channel owns one multiplier column.
        ad::Var alpha = tape.matmul(tape.constant(basis.vectors.transpose()), h);
        ad::Var kernel = p(layer_param_name(layer.index, "kernel"));
        ad::Var filtered;
        if (layer.uses_spectn) {
            const int k_local = config_.spectn.k_local;
            if (m < k_local)
                throw DimensionMismatch("forward: basis smaller than k_local");
            ad::Var low = tape.top_rows(alpha, k_local);
            ad::Var synced = tape.matmul(result.fmap, low);
            ad::Var scaled = tape.cwise_mul(synced, kernel);
            ad::Var back = tape.matmul(tape.transpose(result.fmap), scaled);
            if (m > k_local) {
                ad::Var tail = tape.bottom_rows(alpha, m - k_local);
                filtered = tape.concat_rows({back, tail});
            } else {
                filtered = back;
            }
        } else {
            const KernelSpec spec = KernelSpec::for_param_count(
                config_.kernel_kind, layer.dilation, layer.kernel_param_count);
            const Matrix phi =
                kernel_basis_matrix(spec.kind, spec.dilation, spec.order, basis.eigenvalues);
            ad::Var multipliers = tape.matmul(tape.constant(phi), kernel);
            filtered = tape.cwise_mul(alpha, multipliers);
        }
        h = tape.matmul(tape.constant(basis.vectors), filtered);

        if (layer.index == config_.skip_destination && !config_.skip_sources.empty()) {
            std::vector<ad::Var> parts{h};
            for (int src : config_.skip_sources) parts.push_back(activations[src]);
            h = tape.concat_cols(parts);
        }
        h = tape.add_rowvec(tape.matmul(h, p(layer_param_name(layer.index, "mix.weight"))),
                            p(layer_param_name(layer.index, "mix.bias")));
        if (config_.use_batch_norm)
            h = tape.batch_norm(h, p(layer_param_name(layer.index, "bn.gamma")),
                                p(layer_param_name(layer.index, "bn.beta")),
                                &bn_states_[layer_slot], live_norm_stats);
        if (config_.use_relu) h = tape.relu(h);
        if (training && config_.dropout_rate > 0.0)
            h = tape.dropout(h, config_.dropout_rate,
                             dropout_seed * 1315423911ULL + layer.index);
        if (!tape.value(h).allFinite()) throw NonFiniteActivation(layer.index);
        activations[layer.index] = h;
    }

    result.output = tape.add_rowvec(tape.matmul(h, p("head.weight")), p("head.bias"));
    if (!tape.value(result.output).allFinite())
        throw NonFiniteActivation(static_cast<int>(config_.layers.size()) + 1);
    return result;
}

Matrix Network::predict(const SpectralBasis& basis, const FmapContext& fmap,
                        const VertexSignal& signal) const {
    ad::Tape tape;
    return tape.value(forward(tape, basis, fmap, signal, RunMode::Eval).output);
}

}  // namespace sscnn
