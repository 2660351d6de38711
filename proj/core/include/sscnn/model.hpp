#pragma once

#include <string>
#include <vector>

#include "sscnn/kernels.hpp"
#include "sscnn/spectn.hpp"

namespace sscnn {

/// One spectral convolution block: dilated filter, optional spectral
/// synchronization, 1x1 channel mix, then normalization/activation.
struct LayerConfig {
    int index = 1;             // 1-based
    double dilation = 1.0;
    bool uses_spectn = false;
    int kernel_param_count = 7;
    int out_channels = 50;
};

enum class HeadKind { Segmentation, Keypoint, Normals };

struct HeadConfig {
    HeadKind kind = HeadKind::Segmentation;
    /// Classes for segmentation, keypoints + 1 background class for
    /// keypoint prediction, fixed 3 for normals.
    int output_dim = 2;
};

struct ModelConfig {
    std::vector<LayerConfig> layers;
    int input_channels = 3;
    HeadConfig head;
    double dropout_rate = 0.2;
    KernelKind kernel_kind = KernelKind::ModulatedExpWindow;
    bool use_batch_norm = true;
    bool use_relu = true;
    /// Activations of these layers are concatenated onto the 1x1-convolution
    /// input of layer `skip_destination`. Empty disables skip links.
    std::vector<int> skip_sources = {2, 4, 6, 8};
    int skip_destination = 9;
    SpecTNConfig spectn;

    bool any_spectn() const;
    /// Channel count entering layer `index` (1-based).
    int channels_into(int index) const;
    /// Channel count entering layer `index`'s 1x1 convolution (includes
    /// skip concatenation).
    int mix_input_channels(int index) const;
    void validate() const;
};

/// The 10-layer table from the reference architecture: dilations
/// (1,1,4,4,16,16,64,64,1,1), synchronization on layers 7-8, kernel
/// parameter counts (7,1,7,1,7,1,45,45,7,1), widths (c,c,c,c,2c,...,2c).
ModelConfig paper10_preset(int c = 50, int input_channels = 3,
                           HeadConfig head = {HeadKind::Segmentation, 2});

/// Scaled-down variant of the same table for gradient checking: c channels,
/// small voxel grid and canonical domain so finite differences stay cheap.
ModelConfig paper10_tiny_preset(int c = 4, int input_channels = 3,
                                HeadConfig head = {HeadKind::Segmentation, 2});

/// Same table with every dilation forced to 1, synchronization disabled and
/// the 45-parameter rows replaced by 7-parameter dilated kernels.
ModelConfig small_kernel_ablation(const ModelConfig& base);

/// Single linear block (identity-friendly): one layer, no normalization,
/// activation or dropout. Used by tests.
ModelConfig linear_preset(int channels, int kernel_params = 7);

/// Human-readable layer table; parse_model_description reads it back.
std::string describe(const ModelConfig& config);
ModelConfig parse_model_description(const std::string& text);

std::string to_string(HeadKind kind);

}  // namespace sscnn
