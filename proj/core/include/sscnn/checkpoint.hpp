#pragma once

#include <cstdint>
#include <string>

#include "sscnn/network.hpp"

namespace sscnn {

/// Sectioned container: a text header "SSCNN-CKPT v1", the model description
/// block, the step counter, then per-tensor records (name, rank, dims,
/// row-major float64 payload). Batch-norm running statistics ride along as
/// "state." tensors.
void save_checkpoint(const std::string& path, const Network& net);

/// Rebuilds the network (config, tensors, batch-norm state, step counter).
Network load_checkpoint(const std::string& path);

/// Saves a bare parameter store (used for the pretrained spectral
/// transformer before it is plugged into a full model).
void save_params(const std::string& path, const ParamStore& params,
                 std::int64_t step = 0);
ParamStore load_params(const std::string& path, std::int64_t* step = nullptr);

}  // namespace sscnn
