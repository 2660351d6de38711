#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sscnn/errors.hpp"
#include "sscnn/graph.hpp"
#include "sscnn/eigensolver.hpp"
#include "support/oracles.hpp"

using namespace sscnn;

namespace {

PointCloud cloud_of(const Eigen::Matrix<double, Eigen::Dynamic, 3>& pts) {
    PointCloud pc;
    pc.points = pts;
    return pc;
}

std::set<std::tuple<int, int, double>> edge_set(const WeightedGraph& g) {
    std::set<std::tuple<int, int, double>> edges;
    for (int col = 0; col < g.weights.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it)
            if (it.row() < it.col()) edges.insert({(int)it.row(), (int)it.col(), it.value()});
    return edges;
}

}  // namespace

TEST_CASE("knn graph on three collinear points") {
    PointCloud pc;
    pc.points.resize(3, 3);
    pc.points << 0, 0, 0, 0, 0, 1, 0, 0, 3;
    const WeightedGraph g = build_knn_graph(pc, 1);
    const auto edges = edge_set(g);
    REQUIRE(edges.size() == 2);
    CHECK(edges.count({0, 1, 1.0}) == 1);    // d = 1
    CHECK(edges.count({1, 2, 0.25}) == 1);   // d = 2, kept by union symmetrization
}

TEST_CASE("knn graph with k = N-1 is complete with 1/d^2 weights") {
    const auto pts = oracle::random_points(8, 42);
    const WeightedGraph g = build_knn_graph(cloud_of(pts), 7);
    REQUIRE(edge_set(g).size() == 8 * 7 / 2);
    for (const auto& [i, j, w] : edge_set(g))
        CHECK(w == doctest::Approx(1.0 / (pts.row(i) - pts.row(j)).squaredNorm()).epsilon(1e-14));
}

TEST_CASE("knn graph matches the brute-force oracle") {
    for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        const auto pts = oracle::random_points(10, seed);
        const WeightedGraph g = build_knn_graph(cloud_of(pts), 3);
        const auto expected = oracle::brute_force_knn(pts, 3);
        const auto got = edge_set(g);
        REQUIRE(got.size() == expected.size());
        for (const auto& [i, j, w] : expected) {
            bool found = false;
            for (const auto& [gi, gj, gw] : got)
                if (gi == i && gj == j && gw == doctest::Approx(w).epsilon(1e-12)) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("knn graph weight matrix is exactly symmetric") {
    const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(40, 3)), 4);
    const Matrix dense(g.weights);
    CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < g.n; ++i) CHECK(dense(i, i) == 0.0);
}

TEST_CASE("duplicate points are rejected with indices") {
    PointCloud pc;
    pc.points.resize(4, 3);
    pc.points << 0, 0, 0, 1, 1, 1, 0, 0, 0, 2, 2, 2;
    try {
        build_knn_graph(pc, 2);
        FAIL("expected DuplicatePointsError");
    } catch (const DuplicatePointsError& e) {
        REQUIRE(e.pairs.size() == 1);
        CHECK(e.pairs[0] == std::make_pair(0, 2));
    }
}

TEST_CASE("too few points") {
    CHECK_THROWS_AS(build_knn_graph(cloud_of(oracle::random_points(3, 1)), 3),
                    TooFewPointsError);
}

TEST_CASE("laplacian of a single edge") {
    PointCloud pc;
    pc.points.resize(2, 3);
    pc.points << 0, 0, 0, 0, 0, 2;  // any weight cancels in the normalization
    const Laplacian l = laplacian(build_knn_graph(pc, 1));
    const Matrix dense(l.matrix);
    CHECK(dense(0, 0) == doctest::Approx(1.0));
    CHECK(dense(1, 1) == doctest::Approx(1.0));
    CHECK(dense(0, 1) == doctest::Approx(-1.0));
    const auto [values, vectors] = oracle::dense_eigen(dense);
    CHECK(values[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(values[1] == doctest::Approx(2.0));
}

TEST_CASE("laplacian of the unit-weight path graph 1-2-3") {
    WeightedGraph g;
    g.n = 3;
    std::vector<Eigen::Triplet<double>> t{{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
    g.weights = SparseMatrix(3, 3);
    g.weights.setFromTriplets(t.begin(), t.end());
    const Matrix dense(laplacian(g).matrix);

    Matrix expected(3, 3);
    const double s = 1.0 / std::sqrt(2.0);
    expected << 1, -s, 0, -s, 1, -s, 0, -s, 1;
    CHECK((dense - expected).norm() < 1e-15);

    const auto [values, vectors] = oracle::dense_eigen(dense);
    CHECK(values[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(values[1] == doctest::Approx(1.0));
    CHECK(values[2] == doctest::Approx(2.0));
}

TEST_CASE("D^{1/2} 1 spans the laplacian nullspace") {
    const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(25, 11)), 4);
    const Laplacian l = laplacian(g);
    const Vector degree = g.weights * Vector::Ones(g.n);
    const Vector null_vec = degree.array().sqrt();
    CHECK((l.matrix * null_vec).norm() < 1e-10 * null_vec.norm());
}

TEST_CASE("isolated vertex is reported") {
    WeightedGraph g;
    g.n = 3;
    std::vector<Eigen::Triplet<double>> t{{0, 1, 1.0}, {1, 0, 1.0}};
    g.weights = SparseMatrix(3, 3);
    g.weights.setFromTriplets(t.begin(), t.end());
    try {
        laplacian(g);
        FAIL("expected IsolatedVertexError");
    } catch (const IsolatedVertexError& e) {
        CHECK(e.vertex == 2);
    }
}

TEST_CASE("laplacian eigenvalues stay in [0, 2] and L is PSD") {
    for (std::uint64_t seed : {21ULL, 22ULL, 23ULL, 24ULL}) {
        const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(30, seed)), 5);
        const auto [values, vectors] = oracle::dense_eigen(Matrix(laplacian(g).matrix));
        CHECK(values.minCoeff() >= -1e-10);
        CHECK(values.maxCoeff() <= 2.0 + 1e-10);
    }
}

TEST_CASE("smallest eigenpair: lambda_1 = 0 with b_1 parallel to D^{1/2} 1") {
    const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(40, 5)), 6);
    REQUIRE(count_components(g) == 1);
    const SpectralBasis basis = eigendecompose(laplacian(g), 5);
    CHECK(std::abs(basis.eigenvalues[0]) < 1e-10);
    Vector expected = (g.weights * Vector::Ones(g.n)).array().sqrt();
    expected /= expected.norm();
    CHECK(std::min((basis.vectors.col(0) - expected).norm(),
                   (basis.vectors.col(0) + expected).norm()) < 1e-8);
}

TEST_CASE("iterative eigensolver matches the dense oracle") {
    EigensolverOptions iterative;
    iterative.dense_threshold = 0;  // force the Lanczos path
    for (std::uint64_t seed : {31ULL, 32ULL, 33ULL}) {
        const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(50, seed)), 5);
        const Laplacian l = laplacian(g);
        const SpectralBasis basis = eigendecompose(l, 10, iterative);
        const auto [values, vectors] = oracle::dense_eigen(Matrix(l.matrix));
        CHECK((basis.eigenvalues - values.head(10)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(oracle::projector_distance(basis.vectors, vectors.leftCols(10)) < 1e-6);
    }
}

TEST_CASE("full basis on a 6-node graph is orthogonally complete") {
    const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(6, 77)), 2);
    const SpectralBasis basis = eigendecompose(laplacian(g), 6);
    CHECK((basis.vectors * basis.vectors.transpose() - Matrix::Identity(6, 6)).norm() < 1e-8);
    CHECK((basis.vectors.transpose() * basis.vectors - Matrix::Identity(6, 6)).norm() < 1e-8);
}

TEST_CASE("eigenvector sign convention is deterministic") {
    const WeightedGraph g = build_knn_graph(cloud_of(oracle::random_points(30, 13)), 4);
    const Laplacian l = laplacian(g);
    const SpectralBasis a = eigendecompose(l, 8);
    const SpectralBasis b = eigendecompose(l, 8);
    CHECK((a.vectors - b.vectors).norm() == 0.0);
    for (int c = 0; c < a.count(); ++c) {
        int pivot = 0;
        for (int r = 1; r < a.n(); ++r)
            if (std::abs(a.vectors(r, c)) > std::abs(a.vectors(pivot, c))) pivot = r;
        CHECK(a.vectors(pivot, c) > 0.0);
    }
}

TEST_CASE("disconnected graphs carry one zero eigenvalue per component") {
    // Two clusters far apart with k=2: kNN keeps them disconnected.
    Eigen::Matrix<double, Eigen::Dynamic, 3> pts(8, 3);
    pts << 0, 0, 0, 0.1, 0, 0, 0, 0.1, 0, 0.1, 0.1, 0,
           9, 9, 9, 9.1, 9, 9, 9, 9.1, 9, 9.1, 9.1, 9;
    const WeightedGraph g = build_knn_graph(cloud_of(pts), 2);
    CHECK(count_components(g) == 2);
    const SpectralBasis basis = eigendecompose(laplacian(g), 3);
    CHECK(std::abs(basis.eigenvalues[0]) < 1e-10);
    CHECK(std::abs(basis.eigenvalues[1]) < 1e-10);
    CHECK(basis.eigenvalues[2] > 1e-6);
}

TEST_CASE("uniform scaling leaves the laplacian unchanged") {
    const auto pts = oracle::random_points(25, 99);
    const Laplacian l1 = laplacian(build_knn_graph(cloud_of(pts), 4));
    const WeightedGraph g2 = build_knn_graph(cloud_of((3.7 * pts).eval()), 4);
    const Laplacian l2 = laplacian(g2);
    // W scales by 1/s^2, L does not move.
    const WeightedGraph g1 = build_knn_graph(cloud_of(pts), 4);
    CHECK((Matrix(g2.weights) * 3.7 * 3.7 - Matrix(g1.weights)).norm() < 1e-9);
    CHECK((Matrix(l1.matrix) - Matrix(l2.matrix)).norm() < 1e-12);
}

TEST_CASE("downsample keeps exact counts, order and provenance") {
    PointCloud pc = cloud_of(oracle::random_points(1000, 55));
    std::vector<int> labels(1000);
    for (int i = 0; i < 1000; ++i) labels[i] = i % 7;
    pc.labels = labels;

    const PointCloud same = downsample(pc, 1.0, 123);
    CHECK((same.points - pc.points).norm() == 0.0);
    CHECK(*same.labels == labels);

    const PointCloud quarter = downsample(pc, 0.25, 123);
    REQUIRE(quarter.size() == 250);
    // Every kept point appears in the original with its label.
    for (int r = 0; r < quarter.size(); ++r) {
        bool found = false;
        for (int o = 0; o < pc.size(); ++o)
            if ((quarter.points.row(r) - pc.points.row(o)).norm() == 0.0 &&
                (*quarter.labels)[r] == labels[o])
                found = true;
        CHECK(found);
    }

    const PointCloud again = downsample(pc, 0.25, 123);
    CHECK((again.points - quarter.points).norm() == 0.0);

    CHECK_THROWS_AS(downsample(pc, 0.001, 1, 7), TooFewPointsError);
}

TEST_CASE("normalize_to_unit_cube bounds and preserves labels") {
    PointCloud pc = cloud_of((10.0 * oracle::random_points(50, 4)).eval());
    pc.labels = std::vector<int>(50, 1);
    const PointCloud normalized = normalize_to_unit_cube(pc);
    CHECK(normalized.points.minCoeff() >= 0.0);
    CHECK(normalized.points.maxCoeff() <= 1.0);
    CHECK(normalized.labels->size() == 50);
}
