#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sscnn/network.hpp"
#include "sscnn/spectn.hpp"
#include "sscnn/types.hpp"

namespace sscnn {

/// One shape ready for training/evaluation: cached basis plus optional
/// labels, target normals and the voxelized eigenbasis for synchronization.
struct TrainingShape {
    std::string key;
    int category = 0;
    VertexSignal features;                   // n x input_channels
    SpectralBasis basis;
    std::optional<std::vector<int>> labels;
    std::optional<Eigen::Matrix<double, Eigen::Dynamic, 3>> normals;
    std::optional<Matrix> voxel_values;      // R^3 x k_local
    std::optional<Matrix> fmap_target;       // C_pre for pretraining
};

struct LossRecord {
    int epoch = 0;
    std::string phase;
    double loss = 0.0;
};

struct TrainOptions {
    double learning_rate = 1e-3;
    int epochs = 100;
    std::uint64_t seed = 1;
    std::string optimizer = "adam";  // adam | sgd
    double ortho_weight = 1e-2;      // applied when synchronized layers exist
    /// Normalize with frozen running statistics instead of batch statistics
    /// (late-phase fine-tuning).
    bool freeze_batch_norm = false;
    /// Called after each epoch with (epoch, mean loss); return false to stop
    /// early (the epoch count in the history still reflects reality).
    std::function<bool(int, double)> on_epoch;
};

/// Trains the task head (cross-entropy for segmentation/keypoint labels, L2
/// for normals) over the shapes, one optimizer step per shape, shapes
/// shuffled per epoch from the seed. Appends to the network's step counter
/// and returns the per-epoch mean loss history.
std::vector<LossRecord> train_network(Network& net, std::vector<TrainingShape>& shapes,
                                      const TrainOptions& opts);

/// Phase-1 supervision of the spectral transformer alone:
/// ||C - C_pre||_F^2 plus the weighted orthogonality penalty.
std::vector<LossRecord> pretrain_spectn(const SpecTNConfig& config, ParamStore& params,
                                        const std::vector<TrainingShape>& shapes,
                                        const TrainOptions& opts);

/// Task loss of one shape on a fresh tape (no parameter update).
double evaluate_loss(const Network& net, const TrainingShape& shape);

void write_loss_history(const std::string& path, const std::vector<LossRecord>& history);

}  // namespace sscnn
