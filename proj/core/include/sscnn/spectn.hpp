#pragma once

#include <cstdint>
#include <string>

#include "sscnn/autodiff.hpp"
#include "sscnn/functional_map.hpp"
#include "sscnn/optim.hpp"
#include "sscnn/types.hpp"
#include "sscnn/voxel.hpp"

namespace sscnn {

/// Regression network from a voxelized eigenbasis to a functional map:
/// two strided 3D convolution stages, one hidden fully connected layer, and
/// a zero-initialized linear output so training starts from C = 0.
struct SpecTNConfig {
    int resolution = 32;
    int k_local = 15;
    int k_canon = 45;   // total canonical dimension (all average blocks)
    int conv1_channels = 8;
    int conv2_channels = 16;
    int kernel = 3;
    int stride = 2;
    int hidden = 128;

    ad::Conv3dSpec conv1() const;
    ad::Conv3dSpec conv2() const;
    int flat_size() const;
};

class SpecTN {
public:
    explicit SpecTN(SpecTNConfig config) : config_(config) {}

    const SpecTNConfig& config() const { return config_; }

    /// Registers all tensors into the store under "spectn." names.
    void init_params(ParamStore& params, std::uint64_t seed) const;

    /// Records the forward pass on the tape; returns the k_canon x k_local
    /// map node. Throws ShapeMismatch if the input grid disagrees.
    ad::Var forward(ad::Tape& tape, const ParamStore& params, const Matrix& voxel_values) const;

    /// Convenience non-training forward.
    FunctionalMap predict(const ParamStore& params, const Matrix& voxel_values) const;

private:
    SpecTNConfig config_;
};

}  // namespace sscnn
