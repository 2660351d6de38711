#pragma once

#include <cstdint>

#include "sscnn/types.hpp"

namespace sscnn {

struct EigensolverOptions {
    /// Graphs at or below this size use a dense symmetric solver directly.
    int dense_threshold = 512;
    /// Residual tolerance for Ritz pairs: ||L x - theta x|| <= tol.
    double tolerance = 1e-10;
    /// Maximum Lanczos restart rounds before ConvergenceFailure.
    int max_rounds = 12;
    /// Extra Krylov directions beyond the requested count per round; grows
    /// automatically when a round makes little progress.
    int extra_krylov = 50;
    /// Seed for the (deterministic) random start vectors.
    std::uint64_t seed = 0x5cc5eedULL;
};

/// Computes the m smallest eigenpairs of a symmetric normalized Laplacian.
/// Small problems are solved densely; larger ones use restarted Lanczos with
/// full reorthogonalization and deflation of converged pairs. Eigenvalues are
/// ascending, eigenvectors column-orthonormal, signs canonicalized.
///
/// Throws DimensionMismatch unless 1 <= m <= n, and ConvergenceFailure if the
/// iterative solver stalls (callers may retry with a larger dense_threshold).
SpectralBasis eigendecompose(const Laplacian& l, int m,
                             const EigensolverOptions& opts = {});

/// Flips eigenvector columns so the entry of largest magnitude is positive
/// (ties broken by lowest index). Exposed for cache/file determinism.
void canonicalize_signs(Matrix& vectors);

}  // namespace sscnn
