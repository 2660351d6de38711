#pragma once

#include "sscnn/kernels.hpp"
#include "sscnn/types.hpp"

namespace sscnn {

/// coeffs = B^T f. Throws DimensionMismatch if f.rows() != basis.n().
SpectralCoeffs forward_transform(const VertexSignal& f, const SpectralBasis& basis);

/// f = B * coeffs. Throws DimensionMismatch if coeffs.rows() != basis.count().
VertexSignal backward_transform(const SpectralCoeffs& coeffs, const SpectralBasis& basis);

/// Scales every channel of coeffs by the same multiplier vector.
SpectralCoeffs spectral_multiply(const SpectralCoeffs& coeffs, const Vector& multipliers);

/// The kernel realized as a vertex function centered at `center`:
/// B * diag(m) * B^T * e_center.
VertexSignal spatial_kernel_profile(const KernelSpec& spec, const SpectralBasis& basis,
                                    int center);

}  // namespace sscnn
