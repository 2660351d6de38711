#pragma once

#include <vector>

#include "sscnn/types.hpp"

namespace sscnn {

/// Graph Laplacian eigenbases rescattered onto a fixed voxel grid so bases
/// of different shapes become spatially comparable. Voxel linear index is
/// x + R*(y + R*z). Rows of unoccupied voxels are zero.
struct VoxelBasis {
    int resolution = 0;
    Matrix values;                  // R^3 x m
    std::vector<uint8_t> occupancy; // R^3 flags

    int voxel_count() const { return resolution * resolution * resolution; }
    int occupied_count() const;
};

/// Voxel index of a point in [0,1]^3; coordinates exactly at 1 fall into the
/// last cell. Throws OutOfBoundsError outside the unit cube.
int voxel_index(const Eigen::RowVector3d& p, int resolution);

/// Scatters the first `columns` basis vectors onto the grid; voxels holding
/// several vertices take the mean of their rows. Requires the cloud to be
/// normalized into the unit cube beforehand.
VoxelBasis voxelize_bases(const PointCloud& pc, const SpectralBasis& basis,
                          int resolution, int columns);

/// Binary occupancy of a point cloud on the grid (no basis needed).
std::vector<uint8_t> voxel_occupancy(const PointCloud& pc, int resolution);

/// Adjacency of occupied voxels under 6-connectivity with unit weights,
/// indexed over the full R^3 grid.
SparseMatrix voxel_adjacency(const std::vector<uint8_t>& occupancy, int resolution);

}  // namespace sscnn
