#include "sscnn/kernels.hpp"

#include <cmath>
#include <numbers>

#include "sscnn/errors.hpp"

namespace sscnn {

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "cubic_spline") return KernelKind::CubicSpline;
    if (name == "exp_window") return KernelKind::ExpWindow;
    if (name == "modulated_exp_window") return KernelKind::ModulatedExpWindow;
    throw BadSpecError("unknown kernel kind '" + name + "'");
}

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::CubicSpline: return "cubic_spline";
        case KernelKind::ExpWindow: return "exp_window";
        case KernelKind::ModulatedExpWindow: return "modulated_exp_window";
    }
    return "?";
}

int KernelSpec::expected_coeff_count() const {
    switch (kind) {
        case KernelKind::CubicSpline: return order;
        case KernelKind::ExpWindow: return order + 1;
        case KernelKind::ModulatedExpWindow: return 2 * order + 1;
    }
    return 0;
}

KernelSpec KernelSpec::for_param_count(KernelKind kind, double dilation, int param_count) {
    if (param_count < 1) throw BadSpecError("kernel needs at least one parameter");
    KernelSpec spec;
    spec.dilation = dilation;
    if (param_count == 1) {
        // One scalar multiplier applied uniformly across the spectrum.
        spec.kind = KernelKind::ExpWindow;
        spec.order = 0;
    } else {
        spec.kind = kind;
        switch (kind) {
            case KernelKind::CubicSpline:
                if (param_count < 4)
                    throw BadSpecError("cubic spline needs >= 4 control points");
                spec.order = param_count;
                break;
            case KernelKind::ExpWindow:
                spec.order = param_count - 1;
                break;
            case KernelKind::ModulatedExpWindow:
                if (param_count % 2 == 0)
                    throw BadSpecError("modulated exp window needs an odd parameter count");
                spec.order = (param_count - 1) / 2;
                break;
        }
    }
    spec.coeffs = Vector::Zero(spec.expected_coeff_count());
    spec.coeffs[0] = 1.0;  // identity filter: m == 1 for every kind
    if (spec.kind == KernelKind::CubicSpline) spec.coeffs.setOnes();
    return spec;
}

namespace {

// Cardinal cubic B-spline on [0, 4).
double cardinal_cubic(double u) {
    if (u <= 0.0 || u >= 4.0) return 0.0;
    if (u < 1.0) return u * u * u / 6.0;
    if (u < 2.0) return (-3.0 * u * u * u + 12.0 * u * u - 12.0 * u + 4.0) / 6.0;
    if (u < 3.0) return (3.0 * u * u * u - 24.0 * u * u + 60.0 * u - 44.0) / 6.0;
    const double v = 4.0 - u;
    return v * v * v / 6.0;
}

// Basis of control point c on a uniform unclamped knot grid: knots sit at
// (i - 3) * h with h = 2/(count - 3), so the `count` bases sum to one on all
// of [0, 2].
double cubic_bspline_basis(int control, int count, double x) {
    const double h = 2.0 / (count - 3);
    return cardinal_cubic(x / h - control + 3.0);
}

}  // namespace

Matrix kernel_basis_matrix(KernelKind kind, double dilation, int order,
                           const Vector& eigenvalues) {
    if (dilation <= 0.0) throw BadSpecError("dilation must be positive");
    const int rows = static_cast<int>(eigenvalues.size());
    constexpr double pi = std::numbers::pi;

    switch (kind) {
        case KernelKind::ModulatedExpWindow: {
            Matrix phi(rows, 2 * order + 1);
            for (int i = 0; i < rows; ++i) {
                const double lam = eigenvalues[i];
                phi(i, 0) = 1.0;  // j = 0 cosine term
                for (int j = 1; j <= order; ++j) {
                    const double envelope = std::exp(-j * dilation * lam);
                    const double phase = j * dilation * lam * pi;
                    phi(i, 2 * j) = envelope * std::cos(phase);
                    phi(i, 2 * j - 1) = envelope * std::sin(phase);
                }
            }
            return phi;
        }
        case KernelKind::ExpWindow: {
            Matrix phi(rows, order + 1);
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j <= order; ++j)
                    phi(i, j) = std::exp(-j * dilation * eigenvalues[i]);
            return phi;
        }
        case KernelKind::CubicSpline: {
            const int count = order;
            if (count < 4) throw BadSpecError("cubic spline needs >= 4 control points");
            Matrix phi(rows, count);
            for (int i = 0; i < rows; ++i)
                for (int c = 0; c < count; ++c)
                    phi(i, c) = cubic_bspline_basis(c, count, eigenvalues[i]);
            return phi;
        }
    }
    throw BadSpecError("unhandled kernel kind");
}

Vector kernel_multipliers(const KernelSpec& spec, const Vector& eigenvalues) {
    if (spec.coeffs.size() != spec.expected_coeff_count())
        throw BadSpecError("kernel coefficient count " + std::to_string(spec.coeffs.size()) +
                           " does not match kind/order (expected " +
                           std::to_string(spec.expected_coeff_count()) + ")");
    return kernel_basis_matrix(spec.kind, spec.dilation, spec.order, eigenvalues) *
           spec.coeffs;
}

}  // namespace sscnn
