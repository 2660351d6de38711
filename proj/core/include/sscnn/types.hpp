#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

namespace sscnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// A function on graph vertices: one row per vertex, one column per channel.
using VertexSignal = Eigen::MatrixXd;

/// A shape sampled as a point cloud in normalized model space.
/// Labels and normals, when present, are aligned with the point rows.
struct PointCloud {
    Eigen::Matrix<double, Eigen::Dynamic, 3> points;
    std::optional<std::vector<int>> labels;
    std::optional<Eigen::Matrix<double, Eigen::Dynamic, 3>> normals;

    int size() const { return static_cast<int>(points.rows()); }
};

/// Undirected weighted graph stored as a symmetric sparse matrix with zero diagonal.
struct WeightedGraph {
    int n = 0;
    SparseMatrix weights;
};

/// Symmetric normalized Laplacian L = I - D^{-1/2} W D^{-1/2}; spectrum in [0, 2].
struct Laplacian {
    int n = 0;
    SparseMatrix matrix;
};

/// Truncated eigendecomposition of a Laplacian: the m smallest eigenpairs,
/// eigenvalues ascending, eigenvectors column-orthonormal with a fixed sign
/// convention (largest-magnitude entry positive, ties broken by lowest index).
struct SpectralBasis {
    Vector eigenvalues;   // m, ascending
    Matrix vectors;       // n x m, column-orthonormal

    int n() const { return static_cast<int>(vectors.rows()); }
    int count() const { return static_cast<int>(vectors.cols()); }
};

/// Spectral coordinates of a vertex signal: coeffs = B^T f, one column per channel.
struct SpectralCoeffs {
    Matrix coeffs;  // m x d

    int count() const { return static_cast<int>(coeffs.rows()); }
    int channels() const { return static_cast<int>(coeffs.cols()); }
};

}  // namespace sscnn
