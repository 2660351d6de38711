#include "sscnn/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sscnn/errors.hpp"

namespace sscnn {

ConvergenceFailure::ConvergenceFailure(int iters, double res)
    : Error("eigensolver failed to converge after " + std::to_string(iters) +
            " iterations, best residual " + std::to_string(res)),
      iterations(iters),
      residual(res) {}

void canonicalize_signs(Matrix& vectors) {
    for (int c = 0; c < vectors.cols(); ++c) {
        int pivot = 0;
        double best = std::abs(vectors(0, c));
        for (int r = 1; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > best) {
                best = a;
                pivot = r;
            }
        }
        if (vectors(pivot, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

namespace {

SpectralBasis dense_smallest(const Laplacian& l, int m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(l.matrix));
    if (solver.info() != Eigen::Success)
        throw ConvergenceFailure(0, std::numeric_limits<double>::quiet_NaN());
    SpectralBasis basis;
    basis.eigenvalues = solver.eigenvalues().head(m);
    basis.vectors = solver.eigenvectors().leftCols(m);
    canonicalize_signs(basis.vectors);
    return basis;
}

// Orthogonalizes v against the columns of each basis in `spans` (modified
// Gram-Schmidt, two passes), then normalizes. Returns false if v collapsed.
bool orthonormalize_against(Vector& v, const std::vector<const Matrix*>& spans,
                            const std::vector<int>& used_cols) {
    for (int pass = 0; pass < 2; ++pass) {
        for (size_t s = 0; s < spans.size(); ++s) {
            const Matrix& basis = *spans[s];
            for (int c = 0; c < used_cols[s]; ++c)
                v -= basis.col(c).dot(v) * basis.col(c);
        }
    }
    const double norm = v.norm();
    if (norm < 1e-12) return false;
    v /= norm;
    return true;
}

}  // namespace

SpectralBasis eigendecompose(const Laplacian& l, int m, const EigensolverOptions& opts) {
    const int n = l.n;
    if (m < 1 || m > n)
        throw DimensionMismatch("eigendecompose: need 1 <= m <= n, got m=" +
                                std::to_string(m) + " n=" + std::to_string(n));

    if (n <= opts.dense_threshold) return dense_smallest(l, m);

    // Restarted Lanczos with full reorthogonalization. Converged Ritz pairs
    // are locked and deflated; each restart draws a fresh start vector in the
    // orthogonal complement, so degenerate eigenvalues are picked up one copy
    // per round.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix locked_vecs(n, m);
    std::vector<double> locked_vals;
    int locked = 0;
    int total_iterations = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    int extra = opts.extra_krylov;

    for (int round = 0; round < opts.max_rounds && locked < m; ++round) {
        const int want = m - locked;
        const int dim = std::min(n - locked, std::max(3 * want + extra, 80));

        Matrix v_basis(n, dim);
        Vector alpha(dim), beta(dim);
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        if (!orthonormalize_against(v, {&locked_vecs}, {locked})) continue;

        int steps = 0;
        double beta_last = 0.0;
        for (int j = 0; j < dim; ++j) {
            v_basis.col(j) = v;
            Vector w = l.matrix * v;
            alpha[j] = v.dot(w);
            w -= alpha[j] * v;
            if (j > 0) w -= beta[j - 1] * v_basis.col(j - 1);
            // Full reorthogonalization against locked and current vectors.
            for (int pass = 0; pass < 2; ++pass) {
                for (int c = 0; c < locked; ++c)
                    w -= locked_vecs.col(c).dot(w) * locked_vecs.col(c);
                for (int c = 0; c <= j; ++c)
                    w -= v_basis.col(c).dot(w) * v_basis.col(c);
            }
            steps = j + 1;
            ++total_iterations;
            const double norm = w.norm();
            beta[j] = norm;
            beta_last = norm;
            if (norm < 1e-13) break;  // invariant subspace found
            v = w / norm;
        }

        // Ritz pairs of the tridiagonal section.
        Matrix tri = Matrix::Zero(steps, steps);
        for (int j = 0; j < steps; ++j) {
            tri(j, j) = alpha[j];
            if (j + 1 < steps) {
                tri(j, j + 1) = beta[j];
                tri(j + 1, j) = beta[j];
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> tri_solver(tri);
        const Vector& theta = tri_solver.eigenvalues();
        const Matrix& y = tri_solver.eigenvectors();

        // Lock converged pairs in ascending Ritz order and stop at the first
        // unconverged one. Locking strictly prefix-first means a restart can
        // never fill the basis with a larger eigenvalue while a smaller one
        // is still unresolved. Locked vectors are validated directly against
        // L; the direct bound |theta - lambda| <= ||L x - theta x|| keeps the
        // eigenvalue error within the basis contract.
        const double direct_tolerance = std::max(100.0 * opts.tolerance, 1e-12);
        int locked_this_round = 0;
        for (int i = 0; i < steps && locked < m; ++i) {
            const double ritz_residual = std::abs(beta_last * y(steps - 1, i));
            best_residual = std::min(best_residual, ritz_residual);
            if (ritz_residual > opts.tolerance) break;
            Vector x = v_basis.leftCols(steps) * y.col(i);
            for (int c = 0; c < locked; ++c) x -= locked_vecs.col(c).dot(x) * locked_vecs.col(c);
            const double norm = x.norm();
            if (norm < 0.5) continue;  // duplicate of a locked vector
            x /= norm;
            const double direct_residual = (l.matrix * x - theta[i] * x).norm();
            if (direct_residual > direct_tolerance) break;
            locked_vecs.col(locked) = x;
            locked_vals.push_back(theta[i]);
            ++locked;
            ++locked_this_round;
        }
        // Slow progress: widen the Krylov space for the next round.
        if (locked_this_round < std::max(1, want / 4)) extra = std::min(2 * extra, n);
    }
    if (locked < m) throw ConvergenceFailure(total_iterations, best_residual);

    // Sort the locked pairs ascending; restarts may have found smaller
    // eigenvalues after larger ones were locked.
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked_vals[a] < locked_vals[b]; });

    SpectralBasis basis;
    basis.eigenvalues.resize(m);
    basis.vectors.resize(n, m);
    for (int i = 0; i < m; ++i) {
        basis.eigenvalues[i] = locked_vals[order[i]];
        basis.vectors.col(i) = locked_vecs.col(order[i]);
    }
    canonicalize_signs(basis.vectors);
    return basis;
}

}  // namespace sscnn
