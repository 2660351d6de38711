#pragma once

#include <cstdint>

#include "sscnn/types.hpp"

namespace sscnn {

/// Builds the k-nearest-neighbor graph of a point cloud with 1/d^2 edge
/// weights. The directed kNN edge set is symmetrized by union: an edge is
/// kept if either endpoint selects the other.
///
/// Throws DuplicatePointsError if any two points coincide exactly and
/// TooFewPointsError unless N > k >= 1.
WeightedGraph build_knn_graph(const PointCloud& pc, int k);

/// L = I - D^{-1/2} W D^{-1/2}. Throws IsolatedVertexError if any vertex has
/// zero degree. Disconnected graphs are legal; use count_components to detect.
Laplacian laplacian(const WeightedGraph& g);

/// Number of connected components (edges taken from nonzero weights).
int count_components(const WeightedGraph& g);

/// Uniform random subset of ceil(ratio * N) points without replacement,
/// original order preserved; labels and normals carried along. ratio = 1
/// returns the identical cloud. Throws TooFewPointsError if the subset
/// would fall below min_points.
PointCloud downsample(const PointCloud& pc, double ratio, std::uint64_t seed,
                      int min_points = 2);

/// Rescales and translates points into [0, 1]^3, preserving aspect ratio.
/// Degenerate axes (zero extent) map to 0.5.
PointCloud normalize_to_unit_cube(const PointCloud& pc);

}  // namespace sscnn
