#include "sscnn/average_shape.hpp"

#include <algorithm>
#include <limits>

#include "sscnn/errors.hpp"
#include "sscnn/graph.hpp"
#include "sscnn/voxel.hpp"

namespace sscnn {

VoxelShape make_voxel_shape(const std::vector<uint8_t>& occupancy, int resolution) {
    VoxelShape vs;
    vs.resolution = resolution;
    vs.occupancy = occupancy;
    vs.adjacency = voxel_adjacency(occupancy, resolution);
    return vs;
}

AverageShape build_average_shape(std::span<const VoxelShape> shapes, int k_canon,
                                 const EigensolverOptions& eig_opts) {
    if (shapes.empty()) throw EmptyOccupancyError("no shapes to average");
    const int resolution = shapes[0].resolution;
    const int cells = resolution * resolution * resolution;
    for (const VoxelShape& s : shapes)
        if (s.resolution != resolution)
            throw DimensionMismatch("build_average_shape: mixed voxel resolutions");

    AverageShape avg;
    avg.resolution = resolution;
    avg.adjacency = SparseMatrix(cells, cells);
    avg.occupancy_mean = Vector::Zero(cells);
    for (const VoxelShape& s : shapes) {
        avg.adjacency += s.adjacency;
        for (int v = 0; v < cells; ++v)
            if (s.occupancy[v]) avg.occupancy_mean[v] += 1.0;
    }
    avg.adjacency /= static_cast<double>(shapes.size());
    avg.occupancy_mean /= static_cast<double>(shapes.size());

    // Support = voxels with positive degree; the Laplacian lives on the
    // induced subgraph, eigenvectors are scattered back into full-grid rows.
    Vector degree = avg.adjacency * Vector::Ones(cells);
    std::vector<int> support;
    std::vector<int> dense_of(cells, -1);
    for (int v = 0; v < cells; ++v) {
        if (degree[v] > 0.0) {
            dense_of[v] = static_cast<int>(support.size());
            support.push_back(v);
        }
    }
    const int ns = static_cast<int>(support.size());
    if (ns == 0) throw EmptyOccupancyError("average shape has no connected voxels");
    if (k_canon < 1 || k_canon > ns)
        throw BadSpecError("k_canon=" + std::to_string(k_canon) + " exceeds the " +
                           std::to_string(ns) + "-voxel support of the average shape");

    std::vector<Eigen::Triplet<double>> triplets;
    for (int col = 0; col < avg.adjacency.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(avg.adjacency, col); it; ++it)
            triplets.emplace_back(dense_of[it.row()], dense_of[it.col()], it.value());
    SparseMatrix sub(ns, ns);
    sub.setFromTriplets(triplets.begin(), triplets.end());

    const SpectralBasis sub_basis =
        eigendecompose(laplacian(WeightedGraph{ns, std::move(sub)}), k_canon, eig_opts);

    avg.basis.eigenvalues = sub_basis.eigenvalues;
    avg.basis.vectors = Matrix::Zero(cells, k_canon);
    for (int i = 0; i < ns; ++i) avg.basis.vectors.row(support[i]) = sub_basis.vectors.row(i);
    return avg;
}

int assign_average(const std::vector<uint8_t>& occupancy,
                   std::span<const AverageShape> averages, double occupancy_threshold) {
    if (averages.empty()) throw BadAssignmentError("no average shapes");
    int best = 0;
    long best_distance = std::numeric_limits<long>::max();
    for (size_t a = 0; a < averages.size(); ++a) {
        const AverageShape& avg = averages[a];
        if (static_cast<int>(occupancy.size()) != avg.occupancy_mean.size())
            throw DimensionMismatch("assign_average: resolution mismatch");
        long distance = 0;
        for (size_t v = 0; v < occupancy.size(); ++v) {
            const bool avg_occ = avg.occupancy_mean[static_cast<int>(v)] >= occupancy_threshold;
            if (avg_occ != (occupancy[v] != 0)) ++distance;
        }
        if (distance < best_distance) {
            best_distance = distance;
            best = static_cast<int>(a);
        }
    }
    return best;
}

std::vector<int> cluster_occupancies(std::span<const VoxelShape> shapes, int group_count) {
    const int n = static_cast<int>(shapes.size());
    if (group_count < 1) throw BadSpecError("group_count must be >= 1");
    if (n == 0) return {};
    if (group_count == 1 || n <= group_count) {
        std::vector<int> assign(n);
        for (int i = 0; i < n; ++i) assign[i] = std::min(i, group_count - 1);
        return assign;
    }

    const auto hamming = [](const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
        long d = 0;
        for (size_t i = 0; i < a.size(); ++i)
            if ((a[i] != 0) != (b[i] != 0)) ++d;
        return d;
    };

    // Farthest-first seeds, then a few rounds of binary k-means.
    std::vector<std::vector<uint8_t>> centers;
    centers.push_back(shapes[0].occupancy);
    while (static_cast<int>(centers.size()) < group_count) {
        int farthest = 0;
        long best = -1;
        for (int i = 0; i < n; ++i) {
            long nearest = std::numeric_limits<long>::max();
            for (const auto& c : centers) nearest = std::min(nearest, hamming(shapes[i].occupancy, c));
            if (nearest > best) {
                best = nearest;
                farthest = i;
            }
        }
        centers.push_back(shapes[farthest].occupancy);
    }

    std::vector<int> assign(n, 0);
    for (int round = 0; round < 8; ++round) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best_c = 0;
            long best_d = std::numeric_limits<long>::max();
            for (size_t c = 0; c < centers.size(); ++c) {
                const long d = hamming(shapes[i].occupancy, centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best_c = static_cast<int>(c);
                }
            }
            if (assign[i] != best_c) {
                assign[i] = best_c;
                changed = true;
            }
        }
        if (!changed) break;
        // Majority vote per voxel rebuilds each center.
        for (size_t c = 0; c < centers.size(); ++c) {
            std::vector<int> votes(centers[c].size(), 0);
            int members = 0;
            for (int i = 0; i < n; ++i) {
                if (assign[i] != static_cast<int>(c)) continue;
                ++members;
                for (size_t v = 0; v < votes.size(); ++v)
                    if (shapes[i].occupancy[v]) ++votes[v];
            }
            if (members == 0) continue;
            for (size_t v = 0; v < votes.size(); ++v)
                centers[c][v] = (2 * votes[v] >= members) ? 1 : 0;
        }
    }
    return assign;
}

}  // namespace sscnn
