#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sscnn/average_shape.hpp"
#include "sscnn/errors.hpp"
#include "sscnn/functional_map.hpp"
#include "sscnn/graph.hpp"
#include "sscnn/eigensolver.hpp"
#include "sscnn/train.hpp"
#include "sscnn/voxel.hpp"
#include "support/oracles.hpp"
#include "support/synthetic_shapes.hpp"

using namespace sscnn;

namespace {

SpectralBasis basis_of(const PointCloud& pc, int m, int k = 6) {
    return eigendecompose(laplacian(build_knn_graph(pc, k)), m);
}

}  // namespace

TEST_CASE("voxelize: one vertex per voxel is an exact scatter") {
    PointCloud pc;
    pc.points.resize(4, 3);
    pc.points << 0.1, 0.1, 0.1, 0.9, 0.1, 0.1, 0.1, 0.9, 0.1, 0.1, 0.1, 0.9;
    SpectralBasis basis;
    basis.eigenvalues = Vector::Zero(3);
    basis.vectors = oracle::random_matrix(4, 3, 1);

    const VoxelBasis vb = voxelize_bases(pc, basis, 2, 3);
    CHECK(vb.occupied_count() == 4);
    CHECK((vb.values.row(0).transpose() - basis.vectors.row(0).transpose()).norm() == 0.0);
    CHECK((vb.values.row(1) - basis.vectors.row(1)).norm() == 0.0);  // voxel x=1
    CHECK((vb.values.row(2) - basis.vectors.row(2)).norm() == 0.0);  // voxel y=1
    CHECK((vb.values.row(4) - basis.vectors.row(3)).norm() == 0.0);  // voxel z=1
}

TEST_CASE("voxelize: colliding vertices average their rows") {
    PointCloud pc;
    pc.points.resize(2, 3);
    pc.points << 0.10, 0.10, 0.10, 0.12, 0.11, 0.13;  // same voxel at R=4
    SpectralBasis basis;
    basis.eigenvalues = Vector::Zero(2);
    basis.vectors = oracle::random_matrix(2, 2, 2);
    const VoxelBasis vb = voxelize_bases(pc, basis, 4, 2);
    CHECK(vb.occupied_count() == 1);
    const Eigen::RowVectorXd expected =
        0.5 * (basis.vectors.row(0) + basis.vectors.row(1));
    CHECK((vb.values.row(0) - expected).norm() < 1e-15);
}

TEST_CASE("voxelize matches an independent binning oracle") {
    PointCloud pc;
    pc.points = oracle::random_points(300, 3);
    SpectralBasis basis;
    basis.eigenvalues = Vector::Zero(5);
    basis.vectors = oracle::random_matrix(300, 5, 4);
    const int r = 32;
    const VoxelBasis vb = voxelize_bases(pc, basis, r, 5);

    std::vector<int> counts(r * r * r, 0);
    for (int i = 0; i < 300; ++i) {
        const int x = std::min(static_cast<int>(pc.points(i, 0) * r), r - 1);
        const int y = std::min(static_cast<int>(pc.points(i, 1) * r), r - 1);
        const int z = std::min(static_cast<int>(pc.points(i, 2) * r), r - 1);
        ++counts[x + r * (y + r * z)];
    }
    long total = 0;
    for (int v = 0; v < r * r * r; ++v) {
        CHECK((counts[v] > 0) == (vb.occupancy[v] != 0));
        total += counts[v];
    }
    CHECK(total == 300);

    PointCloud outside;
    outside.points.resize(1, 3);
    outside.points << 1.2, 0.5, 0.5;
    SpectralBasis tiny;
    tiny.eigenvalues = Vector::Zero(1);
    tiny.vectors = Matrix::Ones(1, 1);
    CHECK_THROWS_AS(voxelize_bases(outside, tiny, 4, 1), OutOfBoundsError);
}

TEST_CASE("average of one shape is that shape") {
    const PointCloud pc = synth::voxel_blob_shape(1, 8);
    const auto occupancy = voxel_occupancy(pc, 8);
    const VoxelShape vs = make_voxel_shape(occupancy, 8);
    const AverageShape avg = build_average_shape(std::vector<VoxelShape>{vs}, 10);
    CHECK((Matrix(avg.adjacency) - Matrix(vs.adjacency)).norm() == 0.0);
    for (int v = 0; v < avg.occupancy_mean.size(); ++v)
        CHECK(avg.occupancy_mean[v] == (occupancy[v] ? 1.0 : 0.0));
    CHECK(avg.basis.count() == 10);
    // Column-orthonormal even when embedded into full-grid rows.
    CHECK((avg.basis.vectors.transpose() * avg.basis.vectors - Matrix::Identity(10, 10))
              .norm() < 1e-8);
}

TEST_CASE("average of two disjoint shapes is the half-sum with union support") {
    std::vector<uint8_t> occ_a(4 * 4 * 4, 0), occ_b(4 * 4 * 4, 0);
    occ_a[0] = occ_a[1] = occ_a[2] = 1;           // little bar along x
    occ_b[63] = occ_b[62] = occ_b[61] = 1;        // far corner bar
    const VoxelShape a = make_voxel_shape(occ_a, 4);
    const VoxelShape b = make_voxel_shape(occ_b, 4);
    const AverageShape avg = build_average_shape(std::vector<VoxelShape>{a, b}, 2);
    const Matrix expected = 0.5 * (Matrix(a.adjacency) + Matrix(b.adjacency));
    CHECK((Matrix(avg.adjacency) - expected).norm() == 0.0);
    for (int v : {0, 1, 2, 61, 62, 63}) CHECK(avg.occupancy_mean[v] == 0.5);
}

TEST_CASE("k identical shapes average to the single-shape basis subspace") {
    const PointCloud pc = synth::voxel_blob_shape(2, 8);
    const VoxelShape vs = make_voxel_shape(voxel_occupancy(pc, 8), 8);
    const AverageShape one = build_average_shape(std::vector<VoxelShape>{vs}, 8);
    const AverageShape many =
        build_average_shape(std::vector<VoxelShape>{vs, vs, vs, vs}, 8);
    CHECK((Matrix(many.adjacency) - Matrix(vs.adjacency)).norm() == 0.0);
    CHECK(oracle::projector_distance(one.basis.vectors, many.basis.vectors) < 1e-8);
}

TEST_CASE("precomputed map of the average's own basis is a padded identity") {
    const PointCloud pc = synth::voxel_blob_shape(3, 8);
    const VoxelShape vs = make_voxel_shape(voxel_occupancy(pc, 8), 8);
    const AverageShape avg = build_average_shape(std::vector<VoxelShape>{vs}, 12);

    VoxelBasis self;
    self.resolution = 8;
    self.values = avg.basis.vectors;  // the shape's voxel basis IS the average basis
    self.occupancy.assign(8 * 8 * 8, 1);
    const FunctionalMap map = precompute_fmap(self, avg, 5);
    REQUIRE(map.k_canon() == 12);
    REQUIRE(map.k_local() == 5);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 5; ++j) {
            const double expected = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(std::abs(map.matrix(i, j)) - expected) < 1e-10);
        }

    self.values.setZero();
    CHECK(precompute_fmap(self, avg, 5).matrix.norm() == 0.0);
}

TEST_CASE("precompute_fmap equals the dense matmul oracle and is linear") {
    const int cells = 4 * 4 * 4;
    AverageShape avg;
    avg.resolution = 4;
    avg.basis.vectors = oracle::random_orthonormal(cells, 7, 5);
    avg.basis.eigenvalues = Vector::Zero(7);
    avg.occupancy_mean = Vector::Ones(cells);

    VoxelBasis vb;
    vb.resolution = 4;
    vb.values = oracle::random_matrix(cells, 6, 6);
    vb.occupancy.assign(cells, 1);

    const FunctionalMap map = precompute_fmap(vb, avg, 6);
    Matrix expected = Matrix::Zero(7, 6);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 6; ++j)
            for (int v = 0; v < cells; ++v)
                expected(i, j) += avg.basis.vectors(v, i) * vb.values(v, j);
    CHECK((map.matrix - expected).norm() < 1e-12);

    VoxelBasis doubled = vb;
    doubled.values *= 2.0;
    CHECK((precompute_fmap(doubled, avg, 6).matrix - 2.0 * map.matrix).norm() < 1e-12);
}

TEST_CASE("multi-average maps stack blocks with zeros off the assignment") {
    const int cells = 4 * 4 * 4;
    std::vector<AverageShape> averages(3);
    for (int a = 0; a < 3; ++a) {
        averages[a].resolution = 4;
        averages[a].basis.vectors = oracle::random_orthonormal(cells, 4, 10 + a);
        averages[a].basis.eigenvalues = Vector::Zero(4);
        averages[a].occupancy_mean = Vector::Ones(cells);
    }
    VoxelBasis vb;
    vb.resolution = 4;
    vb.values = oracle::random_matrix(cells, 5, 20);
    vb.occupancy.assign(cells, 1);

    const FunctionalMap single = precompute_fmap(vb, averages[1], 5);
    const FunctionalMap stacked = precompute_fmap_multi(vb, averages, {0, 1, 0}, 5);
    REQUIRE(stacked.k_canon() == 12);
    CHECK(stacked.matrix.topRows(4).norm() == 0.0);
    CHECK((stacked.matrix.middleRows(4, 4) - single.matrix).norm() == 0.0);
    CHECK(stacked.matrix.bottomRows(4).norm() == 0.0);

    const FunctionalMap one = precompute_fmap_multi(
        vb, std::vector<AverageShape>{averages[0]}, {1}, 5);
    CHECK((one.matrix - precompute_fmap(vb, averages[0], 5).matrix).norm() == 0.0);

    CHECK_THROWS_AS(precompute_fmap_multi(vb, averages, {1, 1, 0}, 5), BadAssignmentError);
    CHECK_THROWS_AS(precompute_fmap_multi(vb, averages, {0, 0, 0}, 5), BadAssignmentError);
}

TEST_CASE("assign_average picks the occupancy-closest average") {
    std::vector<AverageShape> averages(3);
    const int cells = 4 * 4 * 4;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int a = 0; a < 3; ++a) {
        averages[a].resolution = 4;
        averages[a].occupancy_mean = Vector::Zero(cells);
        for (int v = 0; v < cells; ++v) averages[a].occupancy_mean[v] = unit(rng) < 0.4;
    }

    // A shape equal to one average's support selects it.
    std::vector<uint8_t> self(cells, 0);
    for (int v = 0; v < cells; ++v) self[v] = averages[2].occupancy_mean[v] >= 0.5;
    CHECK(assign_average(self, averages) == 2);

    // Single average: always index 0.
    CHECK(assign_average(self, std::vector<AverageShape>{averages[1]}) == 0);

    // Brute-force comparison on random shapes.
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<uint8_t> occ(cells, 0);
        for (int v = 0; v < cells; ++v) occ[v] = unit(rng) < 0.4;
        long best = std::numeric_limits<long>::max();
        int expected = 0;
        for (int a = 0; a < 3; ++a) {
            long d = 0;
            for (int v = 0; v < cells; ++v)
                if ((averages[a].occupancy_mean[v] >= 0.5) != (occ[v] != 0)) ++d;
            if (d < best) {
                best = d;
                expected = a;
            }
        }
        CHECK(assign_average(occ, averages) == expected);
    }
}

TEST_CASE("fmap apply/inverse contracts") {
    // Padded identity: apply zero-pads, inverse restores exactly.
    const int k_local = 4, k_canon = 7, m = 9;
    Matrix c = Matrix::Zero(k_canon, k_local);
    c.topRows(k_local).setIdentity();
    const FunctionalMap map{c};

    SpectralCoeffs alpha{oracle::random_matrix(m, 3, 30)};
    const SpectralCoeffs synced = apply_fmap(map, alpha);
    REQUIRE(synced.count() == k_canon + (m - k_local));
    CHECK((synced.coeffs.topRows(k_local) - alpha.coeffs.topRows(k_local)).norm() == 0.0);
    CHECK(synced.coeffs.middleRows(k_local, k_canon - k_local).norm() == 0.0);

    const SpectralCoeffs back = apply_fmap_inverse(map, synced);
    REQUIRE(back.count() == m);
    CHECK((back.coeffs - alpha.coeffs).norm() == 0.0);

    // Pass-through rows are bit-identical.
    CHECK((synced.coeffs.bottomRows(m - k_local) - alpha.coeffs.bottomRows(m - k_local))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    // Zero map sends everything synchronized to zero.
    CHECK(apply_fmap(FunctionalMap{Matrix::Zero(k_canon, k_local)}, alpha)
              .coeffs.topRows(k_canon)
              .norm() == 0.0);

    // Orthonormal columns preserve norms and invert exactly.
    const Matrix q = oracle::random_orthonormal(k_canon, k_local, 31);
    const FunctionalMap ortho{q};
    const SpectralCoeffs synced_q = apply_fmap(ortho, alpha);
    CHECK(synced_q.coeffs.topRows(k_canon).norm() ==
          doctest::Approx(alpha.coeffs.topRows(k_local).norm()).epsilon(1e-10));
    CHECK((apply_fmap_inverse(ortho, synced_q).coeffs - alpha.coeffs).norm() < 1e-12);

    CHECK_THROWS_AS(apply_fmap(map, SpectralCoeffs{oracle::random_matrix(3, 2, 32)}),
                    DimensionMismatch);
}

TEST_CASE("spectn pretraining drives the map toward targets and orthogonality") {
    // Self-consistent toy set: jittered copies of one voxel blob, so the
    // precomputed maps are all nearly orthonormal.
    const int resolution = 8;
    const int k_local = 4, k_canon = 8;
    std::vector<VoxelShape> voxel_shapes;
    std::vector<VoxelBasis> voxel_bases;
    for (int s = 0; s < 6; ++s) {
        const PointCloud pc = synth::voxel_blob_shape(100 + s, resolution);
        const SpectralBasis basis = basis_of(pc, 12);
        voxel_bases.push_back(voxelize_bases(pc, basis, resolution, k_local));
        voxel_shapes.push_back(make_voxel_shape(voxel_bases.back().occupancy, resolution));
    }
    const AverageShape avg = build_average_shape(voxel_shapes, k_canon);

    std::vector<TrainingShape> shapes(6);
    for (int s = 0; s < 6; ++s) {
        shapes[s].key = "blob" + std::to_string(s);
        shapes[s].voxel_values = voxel_bases[s].values;
        shapes[s].fmap_target = precompute_fmap(voxel_bases[s], avg, k_local).matrix;
    }

    SpecTNConfig config;
    config.resolution = resolution;
    config.k_local = k_local;
    config.k_canon = k_canon;
    config.conv1_channels = 4;
    config.conv2_channels = 8;
    config.hidden = 16;
    ParamStore params;
    SpecTN(config).init_params(params, 11);

    double initial_fit = 0.0;
    for (const TrainingShape& s : shapes)
        initial_fit += spectn_losses(SpecTN(config).predict(params, *s.voxel_values).matrix,
                                     *s.fmap_target)
                           .pretrain;

    TrainOptions opts;
    opts.learning_rate = 2e-3;
    opts.epochs = 150;
    opts.seed = 11;
    opts.ortho_weight = 1e-2;
    const auto history = pretrain_spectn(config, params, shapes, opts);

    double final_fit = 0.0, final_ortho = 0.0;
    for (const TrainingShape& s : shapes) {
        const Matrix c = SpecTN(config).predict(params, *s.voxel_values).matrix;
        const SpectnLossValues v = spectn_losses(c, *s.fmap_target);
        final_fit += v.pretrain;
        final_ortho = std::max(final_ortho, std::sqrt(v.ortho));
    }
    CHECK(final_fit < initial_fit);
    CHECK(history.back().loss < history.front().loss);
    CHECK(final_ortho < 0.5);  // tighter bound enforced at acceptance scale
}
