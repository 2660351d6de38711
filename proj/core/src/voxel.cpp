#include "sscnn/voxel.hpp"

#include <algorithm>
#include <cmath>

#include "sscnn/errors.hpp"

namespace sscnn {

int VoxelBasis::occupied_count() const {
    return static_cast<int>(std::count(occupancy.begin(), occupancy.end(), uint8_t{1}));
}

int voxel_index(const Eigen::RowVector3d& p, int resolution) {
    int idx[3];
    for (int a = 0; a < 3; ++a) {
        if (!(p[a] >= 0.0 && p[a] <= 1.0))
            throw OutOfBoundsError("point coordinate " + std::to_string(p[a]) +
                                   " outside [0,1]; normalize the cloud first");
        idx[a] = std::min(static_cast<int>(p[a] * resolution), resolution - 1);
    }
    return idx[0] + resolution * (idx[1] + resolution * idx[2]);
}

VoxelBasis voxelize_bases(const PointCloud& pc, const SpectralBasis& basis,
                          int resolution, int columns) {
    if (resolution < 2) throw BadSpecError("voxel resolution must be >= 2");
    if (pc.size() != basis.n())
        throw DimensionMismatch("voxelize_bases: cloud and basis sizes differ");
    if (columns < 1 || columns > basis.count())
        throw DimensionMismatch("voxelize_bases: bad column count");

    VoxelBasis vb;
    vb.resolution = resolution;
    const int cells = vb.voxel_count();
    vb.values = Matrix::Zero(cells, columns);
    vb.occupancy.assign(cells, 0);

    std::vector<int> counts(cells, 0);
    for (int i = 0; i < pc.size(); ++i) {
        const int cell = voxel_index(pc.points.row(i), resolution);
        vb.values.row(cell) += basis.vectors.row(i).head(columns);
        ++counts[cell];
        vb.occupancy[cell] = 1;
    }
    for (int cell = 0; cell < cells; ++cell)
        if (counts[cell] > 1) vb.values.row(cell) /= counts[cell];
    return vb;
}

std::vector<uint8_t> voxel_occupancy(const PointCloud& pc, int resolution) {
    if (resolution < 2) throw BadSpecError("voxel resolution must be >= 2");
    std::vector<uint8_t> occ(resolution * resolution * resolution, 0);
    for (int i = 0; i < pc.size(); ++i) occ[voxel_index(pc.points.row(i), resolution)] = 1;
    return occ;
}

SparseMatrix voxel_adjacency(const std::vector<uint8_t>& occupancy, int resolution) {
    const int cells = resolution * resolution * resolution;
    if (static_cast<int>(occupancy.size()) != cells)
        throw DimensionMismatch("voxel_adjacency: occupancy size mismatch");

    std::vector<Eigen::Triplet<double>> triplets;
    const auto at = [&](int x, int y, int z) {
        return x + resolution * (y + resolution * z);
    };
    for (int z = 0; z < resolution; ++z)
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x) {
                const int v = at(x, y, z);
                if (!occupancy[v]) continue;
                // Forward neighbors only; mirrored below.
                if (x + 1 < resolution && occupancy[at(x + 1, y, z)]) {
                    triplets.emplace_back(v, at(x + 1, y, z), 1.0);
                    triplets.emplace_back(at(x + 1, y, z), v, 1.0);
                }
                if (y + 1 < resolution && occupancy[at(x, y + 1, z)]) {
                    triplets.emplace_back(v, at(x, y + 1, z), 1.0);
                    triplets.emplace_back(at(x, y + 1, z), v, 1.0);
                }
                if (z + 1 < resolution && occupancy[at(x, y, z + 1)]) {
                    triplets.emplace_back(v, at(x, y, z + 1), 1.0);
                    triplets.emplace_back(at(x, y, z + 1), v, 1.0);
                }
            }
    SparseMatrix adj(cells, cells);
    adj.setFromTriplets(triplets.begin(), triplets.end());
    return adj;
}

}  // namespace sscnn
