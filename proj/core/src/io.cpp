#include "sscnn/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sscnn/errors.hpp"

namespace fs = std::filesystem;

namespace sscnn {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::ifstream open_in(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return is;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);  // keep LF endings everywhere
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

}  // namespace

PointCloud read_pts(const fs::path& path) {
    std::ifstream is = open_in(path);
    std::vector<Eigen::RowVector3d> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Eigen::RowVector3d p;
        ls >> p[0] >> p[1] >> p[2];
        if (ls.fail()) throw IoError(path.string() + ": bad point line '" + line + "'");
        rows.push_back(p);
    }
    PointCloud pc;
    pc.points.resize(static_cast<int>(rows.size()), 3);
    for (size_t i = 0; i < rows.size(); ++i) pc.points.row(static_cast<int>(i)) = rows[i];
    return pc;
}

void write_pts(const fs::path& path, const PointCloud& pc) {
    std::ofstream os = open_out(path);
    for (int i = 0; i < pc.size(); ++i)
        os << format_double(pc.points(i, 0)) << " " << format_double(pc.points(i, 1)) << " "
           << format_double(pc.points(i, 2)) << "\n";
}

std::vector<int> read_seg(const fs::path& path) {
    std::ifstream is = open_in(path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        labels.push_back(std::stoi(line));
        if (labels.back() < 0) throw IoError(path.string() + ": negative label");
    }
    return labels;
}

void write_seg(const fs::path& path, const std::vector<int>& labels) {
    std::ofstream os = open_out(path);
    for (int label : labels) os << label << "\n";
}

Eigen::Matrix<double, Eigen::Dynamic, 3> read_nrm(const fs::path& path) {
    const PointCloud as_points = read_pts(path);
    return as_points.points;
}

void write_nrm(const fs::path& path,
               const Eigen::Matrix<double, Eigen::Dynamic, 3>& normals) {
    PointCloud pc;
    pc.points = normals;
    write_pts(path, pc);
}

void write_basis(const fs::path& path, const SpectralBasis& basis) {
    std::ofstream os = open_out(path);
    os << "SPECBASIS " << basis.n() << " " << basis.count() << "\n";
    for (int i = 0; i < basis.count(); ++i) {
        if (i) os << " ";
        os << format_double(basis.eigenvalues[i]);
    }
    os << "\n";
    for (int r = 0; r < basis.n(); ++r) {
        for (int c = 0; c < basis.count(); ++c) {
            if (c) os << " ";
            os << format_double(basis.vectors(r, c));
        }
        os << "\n";
    }
}

SpectralBasis read_basis(const fs::path& path) {
    std::ifstream is = open_in(path);
    std::string tag;
    int n = 0, m = 0;
    is >> tag >> n >> m;
    if (tag != "SPECBASIS" || is.fail() || n < 1 || m < 1)
        throw IoError(path.string() + ": not a basis cache");
    SpectralBasis basis;
    basis.eigenvalues.resize(m);
    for (int i = 0; i < m; ++i) is >> basis.eigenvalues[i];
    basis.vectors.resize(n, m);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < m; ++c) is >> basis.vectors(r, c);
    if (is.fail()) throw IoError(path.string() + ": truncated basis cache");
    return basis;
}

void write_fmap(const fs::path& path, const FunctionalMap& map) {
    std::ofstream os = open_out(path);
    os << "FMAP " << map.matrix.rows() << " " << map.matrix.cols() << "\n";
    for (int r = 0; r < map.matrix.rows(); ++r) {
        for (int c = 0; c < map.matrix.cols(); ++c) {
            if (c) os << " ";
            os << format_double(map.matrix(r, c));
        }
        os << "\n";
    }
}

FunctionalMap read_fmap(const fs::path& path) {
    std::ifstream is = open_in(path);
    std::string tag;
    int rows = 0, cols = 0;
    is >> tag >> rows >> cols;
    if (tag != "FMAP" || is.fail() || rows < 1 || cols < 1)
        throw IoError(path.string() + ": not a functional map file");
    FunctionalMap map;
    map.matrix.resize(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) is >> map.matrix(r, c);
    if (is.fail()) throw IoError(path.string() + ": truncated functional map");
    return map;
}

void write_average_shape(const fs::path& path, const AverageShape& avg) {
    std::vector<std::array<double, 3>> triplets;  // upper triangle
    for (int col = 0; col < avg.adjacency.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(avg.adjacency, col); it; ++it)
            if (it.row() < it.col())
                triplets.push_back({static_cast<double>(it.row()),
                                    static_cast<double>(it.col()), it.value()});
    std::sort(triplets.begin(), triplets.end());

    std::ofstream os = open_out(path);
    os << "AVGSHAPE " << avg.resolution << " " << triplets.size() << "\n";
    std::vector<int> occupied;
    for (int v = 0; v < avg.occupancy_mean.size(); ++v)
        if (avg.occupancy_mean[v] > 0.0) occupied.push_back(v);
    os << occupied.size() << "\n";
    for (int v : occupied) os << v << " " << format_double(avg.occupancy_mean[v]) << "\n";
    for (const auto& t : triplets)
        os << static_cast<long>(t[0]) << " " << static_cast<long>(t[1]) << " "
           << format_double(t[2]) << "\n";
}

AverageShape read_average_shape(const fs::path& path) {
    std::ifstream is = open_in(path);
    std::string tag;
    int resolution = 0;
    long nnz = 0;
    is >> tag >> resolution >> nnz;
    if (tag != "AVGSHAPE" || is.fail() || resolution < 2)
        throw IoError(path.string() + ": not an average shape file");
    AverageShape avg;
    avg.resolution = resolution;
    const int cells = resolution * resolution * resolution;
    avg.occupancy_mean = Vector::Zero(cells);
    long occupied = 0;
    is >> occupied;
    for (long i = 0; i < occupied; ++i) {
        int v = 0;
        double fraction = 0.0;
        is >> v >> fraction;
        if (is.fail() || v < 0 || v >= cells)
            throw IoError(path.string() + ": bad occupancy entry");
        avg.occupancy_mean[v] = fraction;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * nnz);
    for (long t = 0; t < nnz; ++t) {
        long i = 0, j = 0;
        double value = 0.0;
        is >> i >> j >> value;
        if (is.fail() || i < 0 || j < 0 || i >= cells || j >= cells)
            throw IoError(path.string() + ": bad adjacency triplet");
        triplets.emplace_back(i, j, value);
        triplets.emplace_back(j, i, value);
    }
    avg.adjacency = SparseMatrix(cells, cells);
    avg.adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return avg;
}

std::uint64_t content_hash(const fs::path& file, const std::string& params) {
    std::uint64_t hash = 1469598103934665603ULL;
    const auto mix = [&](unsigned char byte) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    };
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot hash " + file.string());
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i)
            mix(static_cast<unsigned char>(buf[i]));
        if (!is) break;
    }
    for (char c : params) mix(static_cast<unsigned char>(c));
    return hash;
}

std::vector<ShapeEntry> scan_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw IoError("dataset root " + root.string() + " not found");
    std::vector<ShapeEntry> entries;
    for (const auto& category : fs::directory_iterator(root)) {
        if (!category.is_directory()) continue;
        for (const auto& file : fs::directory_iterator(category.path())) {
            if (!file.is_regular_file() || file.path().extension() != ".pts") continue;
            entries.push_back(ShapeEntry{category.path().filename().string(),
                                         file.path().stem().string(), file.path()});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const ShapeEntry& a, const ShapeEntry& b) { return a.key() < b.key(); });
    return entries;
}

std::vector<ShapeEntry> read_split(const fs::path& split_file,
                                   const std::vector<ShapeEntry>& dataset) {
    std::ifstream is = open_in(split_file);
    std::vector<ShapeEntry> out;
    std::string line;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        bool found = false;
        for (const ShapeEntry& e : dataset) {
            if (e.key() == line || (line.find('/') == std::string::npos && e.id == line)) {
                out.push_back(e);
                found = true;
            }
        }
        if (!found)
            throw IoError("split entry '" + line + "' not present in the dataset");
    }
    return out;
}

}  // namespace sscnn
