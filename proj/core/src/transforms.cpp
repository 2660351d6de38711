#include "sscnn/transforms.hpp"

#include "sscnn/errors.hpp"

namespace sscnn {

SpectralCoeffs forward_transform(const VertexSignal& f, const SpectralBasis& basis) {
    if (f.rows() != basis.n())
        throw DimensionMismatch("forward_transform: signal has " + std::to_string(f.rows()) +
                                " rows, basis expects " + std::to_string(basis.n()));
    return SpectralCoeffs{basis.vectors.transpose() * f};
}

VertexSignal backward_transform(const SpectralCoeffs& coeffs, const SpectralBasis& basis) {
    if (coeffs.count() != basis.count())
        throw DimensionMismatch("backward_transform: " + std::to_string(coeffs.count()) +
                                " coefficients, basis has " + std::to_string(basis.count()));
    return basis.vectors * coeffs.coeffs;
}

SpectralCoeffs spectral_multiply(const SpectralCoeffs& coeffs, const Vector& multipliers) {
    if (multipliers.size() != coeffs.count())
        throw DimensionMismatch("spectral_multiply: " + std::to_string(multipliers.size()) +
                                " multipliers for " + std::to_string(coeffs.count()) +
                                " coefficients");
    return SpectralCoeffs{multipliers.asDiagonal() * coeffs.coeffs};
}

VertexSignal spatial_kernel_profile(const KernelSpec& spec, const SpectralBasis& basis,
                                    int center) {
    if (center < 0 || center >= basis.n())
        throw DimensionMismatch("spatial_kernel_profile: center vertex out of range");
    const Vector multipliers = kernel_multipliers(spec, basis.eigenvalues);
    // B diag(m) B^T e_center without forming the n x n operator.
    Vector spectral = basis.vectors.row(center).transpose();
    spectral.array() *= multipliers.array();
    return basis.vectors * spectral;
}

}  // namespace sscnn
