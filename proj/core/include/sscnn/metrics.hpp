#pragma once

#include <map>
#include <vector>

#include "sscnn/types.hpp"

namespace sscnn {

struct IouResult {
    /// Per part-label IoU; parts absent from both prediction and ground
    /// truth are skipped entirely.
    std::map<int, double> per_part;
    double mean = 0.0;
};

/// Point intersection-over-union between predicted and ground-truth labels.
IouResult iou(const std::vector<int>& predicted, const std::vector<int>& truth);

struct CategoryIou {
    int shape_count = 0;
    double mean_iou = 0.0;
};

/// Mean IoU weighted by per-category shape counts.
double category_mean_iou(const std::map<int, CategoryIou>& per_category);

/// Category owning the most predicted points; ties break to the lowest
/// category id. `part_category` maps every part label to its category.
/// Throws UnknownLabelError for labels outside the table.
int majority_vote_classify(const std::vector<int>& predicted_parts,
                           const std::map<int, int>& part_category);

struct KeypointResult {
    Eigen::Matrix<double, Eigen::Dynamic, 3> predicted;
    Eigen::Matrix<double, Eigen::Dynamic, 3> truth;
};

/// Fraction of keypoints within each Euclidean error threshold; thresholds
/// must be ascending and the curve is non-decreasing.
std::vector<double> pck(const std::vector<KeypointResult>& results,
                        const std::vector<double>& thresholds);

struct NormalErrorResult {
    double mean_angle_deg = 0.0;  // arccos(|<p, g>|), orientation-agnostic
    double l2 = 0.0;              // mean squared distance on raw vectors
    int zero_norm_count = 0;      // predictions too short to orient
};

NormalErrorResult normal_error(const Eigen::Matrix<double, Eigen::Dynamic, 3>& predicted,
                               const Eigen::Matrix<double, Eigen::Dynamic, 3>& truth);

}  // namespace sscnn
