#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sscnn/average_shape.hpp"
#include "sscnn/functional_map.hpp"
#include "sscnn/types.hpp"

namespace sscnn {

/// Formats a double at 17 significant digits (round-trips exactly).
std::string format_double(double value);

// Point cloud text formats: one record per line, single-space separated,
// LF line endings.
PointCloud read_pts(const std::filesystem::path& path);
void write_pts(const std::filesystem::path& path, const PointCloud& pc);

std::vector<int> read_seg(const std::filesystem::path& path);
void write_seg(const std::filesystem::path& path, const std::vector<int>& labels);

Eigen::Matrix<double, Eigen::Dynamic, 3> read_nrm(const std::filesystem::path& path);
void write_nrm(const std::filesystem::path& path,
               const Eigen::Matrix<double, Eigen::Dynamic, 3>& normals);

// Basis cache: "SPECBASIS <n> <m>", a line of m eigenvalues, then n rows of
// m eigenvector coordinates.
void write_basis(const std::filesystem::path& path, const SpectralBasis& basis);
SpectralBasis read_basis(const std::filesystem::path& path);

// Functional map: "FMAP <rows> <cols>" then the rows.
void write_fmap(const std::filesystem::path& path, const FunctionalMap& map);
FunctionalMap read_fmap(const std::filesystem::path& path);

// Average shape: "AVGSHAPE <R> <nnz>", an occupancy section
// "<count>" + "<voxel> <fraction>" lines, then nnz "(i, j, value)" triplet
// lines of the upper triangle of the averaged adjacency. The canonical
// basis is cached separately in basis format.
void write_average_shape(const std::filesystem::path& path, const AverageShape& avg);
AverageShape read_average_shape(const std::filesystem::path& path);

/// FNV-1a over file bytes plus a parameter string; used for cache validity.
std::uint64_t content_hash(const std::filesystem::path& file, const std::string& params);

/// One shape on disk: <root>/<category>/<id>.pts with optional .seg/.nrm.
struct ShapeEntry {
    std::string category;
    std::string id;
    std::filesystem::path pts;

    std::string key() const { return category + "/" + id; }
};

/// Scans <root>/<category>/<id>.pts two levels deep, sorted by key.
std::vector<ShapeEntry> scan_dataset(const std::filesystem::path& root);

/// Split file: one shape key per line ("category/id", or bare "id" matched
/// against every category). Returns entries of the dataset in split order.
std::vector<ShapeEntry> read_split(const std::filesystem::path& split_file,
                                   const std::vector<ShapeEntry>& dataset);

}  // namespace sscnn
