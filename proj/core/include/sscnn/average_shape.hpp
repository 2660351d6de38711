#pragma once

#include <span>
#include <vector>

#include "sscnn/eigensolver.hpp"
#include "sscnn/types.hpp"

namespace sscnn {

/// Per-shape volumetric footprint used to build average shapes.
struct VoxelShape {
    int resolution = 0;
    std::vector<uint8_t> occupancy;
    SparseMatrix adjacency;  // R^3 x R^3, 6-connectivity of occupied voxels
};

/// A virtual shape whose voxel-graph adjacency is the mean over a
/// collection; its eigenbasis spans the canonical spectral domain.
struct AverageShape {
    int resolution = 0;
    SparseMatrix adjacency;       // averaged, symmetric, entries >= 0
    Vector occupancy_mean;        // R^3, fraction of member shapes per voxel
    SpectralBasis basis;          // R^3 rows (zero off-support), k_canon columns
};

VoxelShape make_voxel_shape(const std::vector<uint8_t>& occupancy, int resolution);

/// Averages the adjacencies entrywise and eigendecomposes the normalized
/// Laplacian of the support subgraph (voxels of positive degree), embedding
/// the eigenvectors back into full-grid rows.
AverageShape build_average_shape(std::span<const VoxelShape> shapes, int k_canon,
                                 const EigensolverOptions& eig_opts = {});

/// Index of the average whose thresholded occupancy is closest in Hamming
/// distance to the shape's occupancy; ties break to the lowest index.
int assign_average(const std::vector<uint8_t>& occupancy,
                   std::span<const AverageShape> averages,
                   double occupancy_threshold = 0.5);

/// Groups shapes into `group_count` clusters by occupancy Hamming distance
/// (binary k-means with deterministic farthest-first seeding). Returns the
/// cluster id per shape. Used to construct multiple average shapes.
std::vector<int> cluster_occupancies(std::span<const VoxelShape> shapes, int group_count);

}  // namespace sscnn
