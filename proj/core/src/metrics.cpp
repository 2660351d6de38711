#include "sscnn/metrics.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "sscnn/errors.hpp"

namespace sscnn {

IouResult iou(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw DimensionMismatch("iou: prediction and truth must be nonempty equal-length");

    std::set<int> parts(predicted.begin(), predicted.end());
    parts.insert(truth.begin(), truth.end());

    IouResult result;
    double total = 0.0;
    for (int part : parts) {
        long intersection = 0, uni = 0;
        for (size_t i = 0; i < predicted.size(); ++i) {
            const bool in_pred = predicted[i] == part;
            const bool in_truth = truth[i] == part;
            if (in_pred && in_truth) ++intersection;
            if (in_pred || in_truth) ++uni;
        }
        const double value = static_cast<double>(intersection) / static_cast<double>(uni);
        result.per_part[part] = value;
        total += value;
    }
    result.mean = total / static_cast<double>(parts.size());
    return result;
}

double category_mean_iou(const std::map<int, CategoryIou>& per_category) {
    if (per_category.empty()) throw DimensionMismatch("category_mean_iou: no categories");
    double weighted = 0.0;
    long shapes = 0;
    for (const auto& [category, entry] : per_category) {
        weighted += entry.shape_count * entry.mean_iou;
        shapes += entry.shape_count;
    }
    if (shapes == 0) throw DimensionMismatch("category_mean_iou: zero shape count");
    return weighted / static_cast<double>(shapes);
}

int majority_vote_classify(const std::vector<int>& predicted_parts,
                           const std::map<int, int>& part_category) {
    if (predicted_parts.empty())
        throw DimensionMismatch("majority_vote_classify: no predictions");
    std::map<int, long> votes;
    for (int part : predicted_parts) {
        auto it = part_category.find(part);
        if (it == part_category.end())
            throw UnknownLabelError("part label " + std::to_string(part) +
                                    " missing from the category table");
        ++votes[it->second];
    }
    int best_category = votes.begin()->first;
    long best_votes = votes.begin()->second;
    for (const auto& [category, count] : votes) {
        if (count > best_votes) {  // ties keep the lowest id (map is ordered)
            best_votes = count;
            best_category = category;
        }
    }
    return best_category;
}

std::vector<double> pck(const std::vector<KeypointResult>& results,
                        const std::vector<double>& thresholds) {
    for (size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            throw BadSpecError("pck: thresholds must be ascending");

    std::vector<double> errors;
    for (const KeypointResult& r : results) {
        if (r.predicted.rows() != r.truth.rows())
            throw DimensionMismatch("pck: one prediction per annotated keypoint");
        for (int k = 0; k < r.predicted.rows(); ++k)
            errors.push_back((r.predicted.row(k) - r.truth.row(k)).norm());
    }

    std::vector<double> curve(thresholds.size(), 0.0);
    if (errors.empty()) return curve;
    for (size_t t = 0; t < thresholds.size(); ++t) {
        long correct = 0;
        for (double e : errors)
            if (e <= thresholds[t]) ++correct;
        curve[t] = static_cast<double>(correct) / static_cast<double>(errors.size());
    }
    return curve;
}

NormalErrorResult normal_error(const Eigen::Matrix<double, Eigen::Dynamic, 3>& predicted,
                               const Eigen::Matrix<double, Eigen::Dynamic, 3>& truth) {
    if (predicted.rows() != truth.rows() || predicted.rows() == 0)
        throw DimensionMismatch("normal_error: shape mismatch");

    NormalErrorResult result;
    double angle_sum = 0.0;
    int angle_count = 0;
    for (int i = 0; i < predicted.rows(); ++i) {
        result.l2 += (predicted.row(i) - truth.row(i)).squaredNorm();
        const double norm = predicted.row(i).norm();
        if (norm < 1e-12) {
            ++result.zero_norm_count;
            continue;
        }
        const double cosine =
            std::min(1.0, std::abs(predicted.row(i).dot(truth.row(i)) / norm));
        angle_sum += std::acos(cosine) * 180.0 / std::numbers::pi;
        ++angle_count;
    }
    result.l2 /= predicted.rows();
    result.mean_angle_deg = angle_count > 0 ? angle_sum / angle_count : 0.0;
    return result;
}

}  // namespace sscnn
