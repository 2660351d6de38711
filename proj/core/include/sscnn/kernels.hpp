#pragma once

#include <string>

#include "sscnn/types.hpp"

namespace sscnn {

enum class KernelKind {
    CubicSpline,          // uniform cubic B-spline control values on [0, 2]
    ExpWindow,            // sum_j w_j exp(-j * dilation * lambda)
    ModulatedExpWindow,   // exponential windows with cos/sin modulation
};

KernelKind kernel_kind_from_string(const std::string& name);
std::string to_string(KernelKind kind);

/// Spectral parameterization of a convolution kernel: multipliers m(lambda)
/// over the Laplacian spectrum. `order` fixes the coefficient count:
/// 2*order+1 for ModulatedExpWindow, order+1 for ExpWindow, and `order`
/// control points for CubicSpline.
struct KernelSpec {
    KernelKind kind = KernelKind::ModulatedExpWindow;
    double dilation = 1.0;  // > 0; larger means wider spatial support
    int order = 3;
    Vector coeffs;

    int expected_coeff_count() const;

    /// Builds a spec with `param_count` learnable coefficients of the given
    /// kind. A single parameter degenerates to one uniform multiplier for
    /// every kind. Coefficients start at the identity filter m == 1.
    static KernelSpec for_param_count(KernelKind kind, double dilation, int param_count);
};

/// Evaluation matrix Phi with Phi * coeffs == multipliers; one row per
/// eigenvalue, one column per coefficient. Multipliers are linear in the
/// coefficients for every kernel kind, which is what training relies on.
Matrix kernel_basis_matrix(KernelKind kind, double dilation, int order,
                           const Vector& eigenvalues);

/// Multipliers m(lambda_i) for the given spec. Throws BadSpecError when the
/// coefficient length does not match the kind/order.
Vector kernel_multipliers(const KernelSpec& spec, const Vector& eigenvalues);

}  // namespace sscnn
