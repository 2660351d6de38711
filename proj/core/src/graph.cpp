#include "sscnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "sscnn/errors.hpp"

namespace sscnn {

DuplicatePointsError::DuplicatePointsError(std::vector<std::pair<int, int>> dup_pairs)
    : Error([&] {
          std::ostringstream os;
          os << "duplicate points:";
          for (const auto& [a, b] : dup_pairs) os << " (" << a << "," << b << ")";
          return os.str();
      }()),
      pairs(std::move(dup_pairs)) {}

IsolatedVertexError::IsolatedVertexError(int v)
    : Error("isolated vertex " + std::to_string(v) + " has zero degree"), vertex(v) {}

WeightedGraph build_knn_graph(const PointCloud& pc, int k) {
    const int n = pc.size();
    if (k < 1) throw BadSpecError("k must be >= 1");
    if (n <= k) throw TooFewPointsError("need more than k=" + std::to_string(k) +
                                        " points, got " + std::to_string(n));
    if (!pc.points.allFinite()) throw BadSpecError("point coordinates must be finite");

    // All-pairs distances; duplicates are rejected rather than perturbed so
    // label provenance survives.
    std::vector<std::pair<int, int>> duplicates;
    Matrix d2(n, n);
    for (int i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double dij = (pc.points.row(i) - pc.points.row(j)).squaredNorm();
            d2(i, j) = dij;
            d2(j, i) = dij;
            if (dij == 0.0) duplicates.emplace_back(i, j);
        }
    }
    if (!duplicates.empty()) throw DuplicatePointsError(std::move(duplicates));

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(2 * n) * static_cast<size_t>(k));
    std::vector<int> order(n);
    // Union symmetrization: collect each vertex's k nearest, then keep i<j
    // pairs selected by either side.
    std::vector<std::vector<int>> nearest(n);
    for (int i = 0; i < n; ++i) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        order.erase(order.begin() + i);
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](int a, int b) {
                              if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
                              return a < b;  // deterministic on ties
                          });
        nearest[i].assign(order.begin(), order.begin() + k);
    }
    std::vector<std::vector<char>> picked(n, std::vector<char>(0));
    Eigen::SparseMatrix<double> w(n, n);
    {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i)
            for (int j : nearest[i]) edges.emplace_back(std::min(i, j), std::max(i, j));
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (const auto& [a, b] : edges) {
            const double weight = 1.0 / d2(a, b);
            triplets.emplace_back(a, b, weight);
            triplets.emplace_back(b, a, weight);
        }
        w.setFromTriplets(triplets.begin(), triplets.end());
    }
    return WeightedGraph{n, std::move(w)};
}

Laplacian laplacian(const WeightedGraph& g) {
    const int n = g.n;
    Vector degree = g.weights * Vector::Ones(n);
    for (int i = 0; i < n; ++i)
        if (degree[i] <= 0.0) throw IsolatedVertexError(i);

    Vector inv_sqrt = degree.array().rsqrt();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(g.weights.nonZeros()) + n);
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
    for (int col = 0; col < g.weights.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) {
            triplets.emplace_back(it.row(), it.col(),
                                  -inv_sqrt[it.row()] * it.value() * inv_sqrt[it.col()]);
        }
    }
    SparseMatrix l(n, n);
    l.setFromTriplets(triplets.begin(), triplets.end());
    return Laplacian{n, std::move(l)};
}

int count_components(const WeightedGraph& g) {
    std::vector<int> component(g.n, -1);
    int count = 0;
    std::vector<int> stack;
    for (int start = 0; start < g.n; ++start) {
        if (component[start] >= 0) continue;
        stack.push_back(start);
        component[start] = count;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (SparseMatrix::InnerIterator it(g.weights, v); it; ++it) {
                const int u = static_cast<int>(it.row());
                if (component[u] < 0) {
                    component[u] = count;
                    stack.push_back(u);
                }
            }
        }
        ++count;
    }
    return count;
}

PointCloud downsample(const PointCloud& pc, double ratio, std::uint64_t seed,
                      int min_points) {
    if (ratio <= 0.0 || ratio > 1.0) throw BadSpecError("ratio must be in (0, 1]");
    const int n = pc.size();
    const int keep = static_cast<int>(std::ceil(ratio * n));
    if (keep < min_points)
        throw TooFewPointsError("downsample to " + std::to_string(keep) +
                                " points, need at least " + std::to_string(min_points));

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (keep < n) {
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(keep);
        std::sort(idx.begin(), idx.end());  // keep original point order
    }

    PointCloud out;
    out.points.resize(keep, 3);
    for (int r = 0; r < keep; ++r) out.points.row(r) = pc.points.row(idx[r]);
    if (pc.labels) {
        std::vector<int> labels(keep);
        for (int r = 0; r < keep; ++r) labels[r] = (*pc.labels)[idx[r]];
        out.labels = std::move(labels);
    }
    if (pc.normals) {
        Eigen::Matrix<double, Eigen::Dynamic, 3> normals(keep, 3);
        for (int r = 0; r < keep; ++r) normals.row(r) = pc.normals->row(idx[r]);
        out.normals = std::move(normals);
    }
    return out;
}

PointCloud normalize_to_unit_cube(const PointCloud& pc) {
    PointCloud out = pc;
    const Eigen::RowVector3d lo = pc.points.colwise().minCoeff();
    const Eigen::RowVector3d hi = pc.points.colwise().maxCoeff();
    const double extent = (hi - lo).maxCoeff();
    if (extent <= 0.0) {
        out.points.setConstant(0.5);
        return out;
    }
    const Eigen::RowVector3d center = 0.5 * (hi + lo);
    for (int r = 0; r < out.points.rows(); ++r) {
        const Eigen::RowVector3d p =
            (pc.points.row(r) - center) / extent + Eigen::RowVector3d::Constant(0.5);
        // Rounding can leave -1e-17 or 1 + 1e-16 at the extremes; the
        // contract is coordinates inside [0, 1] exactly.
        out.points.row(r) = p.cwiseMax(0.0).cwiseMin(1.0);
    }
    return out;
}

}  // namespace sscnn
