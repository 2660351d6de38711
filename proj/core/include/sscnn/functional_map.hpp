#pragma once

#include <span>
#include <vector>

#include "sscnn/average_shape.hpp"
#include "sscnn/types.hpp"
#include "sscnn/voxel.hpp"

namespace sscnn {

/// Linear map from a shape's truncated spectral coordinates (k_local) into
/// the canonical domain (k_canon rows): synced = matrix * local.
struct FunctionalMap {
    Matrix matrix;  // k_canon x k_local

    int k_local() const { return static_cast<int>(matrix.cols()); }
    int k_canon() const { return static_cast<int>(matrix.rows()); }
};

/// C_pre = Bbar_v^T B_v restricted to the first k_local columns.
FunctionalMap precompute_fmap(const VoxelBasis& shape_basis, const AverageShape& avg,
                              int k_local);

/// Block-stacked map over several averages; only the assigned block is
/// nonzero. `assignment` must be one-hot.
FunctionalMap precompute_fmap_multi(const VoxelBasis& shape_basis,
                                    std::span<const AverageShape> averages,
                                    const std::vector<int>& assignment, int k_local);

/// synced = C * coeffs on the first k_local rows; rows beyond k_local pass
/// through unchanged (bit-identical).
SpectralCoeffs apply_fmap(const FunctionalMap& map, const SpectralCoeffs& coeffs);

/// Inverse direction via C^T (exact when C has orthonormal columns); the
/// pass-through tail is restored unchanged.
SpectralCoeffs apply_fmap_inverse(const FunctionalMap& map, const SpectralCoeffs& synced);

struct SpectnLossValues {
    double pretrain = 0.0;  // ||C - C_pre||_F^2
    double ortho = 0.0;     // distance of the small gram matrix from identity
};

/// Pretraining distance and orthogonality penalty. The penalty uses the
/// gram of the smaller dimension (C C^T for wide maps, C^T C for tall ones),
/// which is the only satisfiable orientation for rectangular C.
SpectnLossValues spectn_losses(const Matrix& map, const Matrix& pretrain_target);

/// Closed-form gradient of the orthogonality penalty w.r.t. the map.
Matrix ortho_penalty_gradient(const Matrix& map);

}  // namespace sscnn
