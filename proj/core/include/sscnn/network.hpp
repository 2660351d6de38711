#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sscnn/autodiff.hpp"
#include "sscnn/model.hpp"
#include "sscnn/optim.hpp"
#include "sscnn/types.hpp"

namespace sscnn {

enum class RunMode {
    Train,
    /// Training forward with frozen normalization statistics: dropout still
    /// applies, batch norm normalizes with the running averages. Used for
    /// late fine-tuning so train- and eval-mode predictions agree.
    TrainFrozenNorm,
    Eval,
};

/// Per-shape context for synchronized layers: the voxelized eigenbasis that
/// feeds the spectral transformer. Unused when the model has no such layer.
struct FmapContext {
    const Matrix* voxel_values = nullptr;  // R^3 x k_local
};

struct ForwardResult {
    ad::Var output;                  // n x head_dim logits/values
    ad::Var fmap;                    // invalid unless a synchronized layer ran
};

/// Owns the trainable tensors, batch-norm state and step counter for one
/// model. Forward passes record onto a caller-provided tape.
class Network {
public:
    explicit Network(ModelConfig config);

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::vector<ad::BatchNormState>& bn_states() { return bn_states_; }
    const std::vector<ad::BatchNormState>& bn_states() const { return bn_states_; }
    std::int64_t& step() { return step_; }
    std::int64_t step() const { return step_; }

    /// (Re)initializes all tensors deterministically from the seed.
    void init_params(std::uint64_t seed);

    /// Records a full forward pass. Dropout masks derive from dropout_seed;
    /// eval mode applies no masking. Throws NonFiniteActivation with the
    /// layer index if an activation leaves the finite range, ShapeMismatch
    /// on bad channel counts and MissingPrerequisite if a synchronized layer
    /// runs without an FmapContext.
    ForwardResult forward(ad::Tape& tape, const SpectralBasis& basis,
                          const FmapContext& fmap, const VertexSignal& signal,
                          RunMode mode, std::uint64_t dropout_seed = 0) const;

    /// Eval-mode convenience: returns the head output values.
    Matrix predict(const SpectralBasis& basis, const FmapContext& fmap,
                   const VertexSignal& signal) const;

private:
    ModelConfig config_;
    ParamStore params_;
    // Mutable across forward passes in train mode (running statistics), like
    // the step counter. One slot per layer regardless of use_batch_norm.
    mutable std::vector<ad::BatchNormState> bn_states_;
    std::int64_t step_ = 0;
};

/// Parameter names per layer, e.g. "layer3.kernel", "layer3.mix.weight".
std::string layer_param_name(int layer_index, const std::string& tensor);

}  // namespace sscnn
