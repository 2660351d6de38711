#include "sscnn/functional_map.hpp"

#include <algorithm>
#include <numeric>

#include "sscnn/errors.hpp"

namespace sscnn {

FunctionalMap precompute_fmap(const VoxelBasis& shape_basis, const AverageShape& avg,
                              int k_local) {
    if (shape_basis.resolution != avg.resolution)
        throw DimensionMismatch("precompute_fmap: voxel resolutions differ");
    if (k_local < 1 || k_local > shape_basis.values.cols())
        throw DimensionMismatch("precompute_fmap: k_local exceeds voxelized basis width");
    return FunctionalMap{avg.basis.vectors.transpose() *
                         shape_basis.values.leftCols(k_local)};
}

FunctionalMap precompute_fmap_multi(const VoxelBasis& shape_basis,
                                    std::span<const AverageShape> averages,
                                    const std::vector<int>& assignment, int k_local) {
    if (averages.empty()) throw BadAssignmentError("no average shapes");
    if (assignment.size() != averages.size())
        throw BadAssignmentError("assignment length must match average count");
    const int total = std::accumulate(assignment.begin(), assignment.end(), 0);
    if (total != 1 ||
        std::any_of(assignment.begin(), assignment.end(), [](int a) { return a != 0 && a != 1; }))
        throw BadAssignmentError("assignment must be one-hot");

    int rows = 0;
    for (const AverageShape& avg : averages) rows += avg.basis.count();
    FunctionalMap map;
    map.matrix = Matrix::Zero(rows, k_local);
    int offset = 0;
    for (size_t a = 0; a < averages.size(); ++a) {
        const int block = averages[a].basis.count();
        if (assignment[a] == 1)
            map.matrix.middleRows(offset, block) =
                precompute_fmap(shape_basis, averages[a], k_local).matrix;
        offset += block;
    }
    return map;
}

SpectralCoeffs apply_fmap(const FunctionalMap& map, const SpectralCoeffs& coeffs) {
    const int k_local = map.k_local();
    if (coeffs.count() < k_local)
        throw DimensionMismatch("apply_fmap: fewer coefficients than k_local");
    const int tail = coeffs.count() - k_local;
    SpectralCoeffs out;
    out.coeffs.resize(map.k_canon() + tail, coeffs.channels());
    out.coeffs.topRows(map.k_canon()) = map.matrix * coeffs.coeffs.topRows(k_local);
    if (tail > 0) out.coeffs.bottomRows(tail) = coeffs.coeffs.bottomRows(tail);
    return out;
}

SpectralCoeffs apply_fmap_inverse(const FunctionalMap& map, const SpectralCoeffs& synced) {
    const int k_canon = map.k_canon();
    if (synced.count() < k_canon)
        throw DimensionMismatch("apply_fmap_inverse: fewer coefficients than k_canon");
    const int tail = synced.count() - k_canon;
    SpectralCoeffs out;
    out.coeffs.resize(map.k_local() + tail, synced.channels());
    out.coeffs.topRows(map.k_local()) = map.matrix.transpose() * synced.coeffs.topRows(k_canon);
    if (tail > 0) out.coeffs.bottomRows(tail) = synced.coeffs.bottomRows(tail);
    return out;
}

SpectnLossValues spectn_losses(const Matrix& map, const Matrix& pretrain_target) {
    if (map.rows() != pretrain_target.rows() || map.cols() != pretrain_target.cols())
        throw ShapeMismatch("spectn_losses: map and target shapes differ");
    SpectnLossValues v;
    v.pretrain = (map - pretrain_target).squaredNorm();
    if (map.rows() <= map.cols()) {
        v.ortho = (map * map.transpose() -
                   Matrix::Identity(map.rows(), map.rows())).squaredNorm();
    } else {
        v.ortho = (map.transpose() * map -
                   Matrix::Identity(map.cols(), map.cols())).squaredNorm();
    }
    return v;
}

Matrix ortho_penalty_gradient(const Matrix& map) {
    if (map.rows() <= map.cols()) {
        const Matrix gram = map * map.transpose() - Matrix::Identity(map.rows(), map.rows());
        return 4.0 * gram * map;
    }
    const Matrix gram = map.transpose() * map - Matrix::Identity(map.cols(), map.cols());
    return 4.0 * map * gram;
}

}  // namespace sscnn
