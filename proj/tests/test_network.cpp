#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "sscnn/checkpoint.hpp"
#include "sscnn/errors.hpp"
#include "sscnn/graph.hpp"
#include "sscnn/eigensolver.hpp"
#include "sscnn/model.hpp"
#include "sscnn/network.hpp"
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

TEST_CASE("paper10 preset reproduces the architecture table") {
    const ModelConfig config = paper10_preset(50);
    REQUIRE(config.layers.size() == 10);
    const double dilation[10] = {1, 1, 4, 4, 16, 16, 64, 64, 1, 1};
    const bool spectn[10] = {false, false, false, false, false,
                             false, true,  true,  false, false};
    const int params[10] = {7, 1, 7, 1, 7, 1, 45, 45, 7, 1};
    const int width[10] = {50, 50, 50, 50, 100, 100, 100, 100, 100, 100};
    for (int i = 0; i < 10; ++i) {
        CHECK(config.layers[i].dilation == dilation[i]);
        CHECK(config.layers[i].uses_spectn == spectn[i]);
        CHECK(config.layers[i].kernel_param_count == params[i]);
        CHECK(config.layers[i].out_channels == width[i]);
    }
    CHECK(config.spectn.k_local == 15);
    CHECK(config.spectn.k_canon == 45);

    // Small-kernel layers never synchronize.
    for (const LayerConfig& l : config.layers)
        if (l.dilation == 1.0 || l.kernel_param_count <= 7) CHECK_FALSE(l.uses_spectn);
}

TEST_CASE("describe/parse roundtrip") {
    for (const ModelConfig& config :
         {paper10_preset(50), paper10_tiny_preset(4), linear_preset(3),
          small_kernel_ablation(paper10_preset(8))}) {
        const std::string text = describe(config);
        const ModelConfig parsed = parse_model_description(text);
        CHECK(describe(parsed) == text);
    }
    // An empty config describes to the header only and parses back empty.
    ModelConfig empty;
    empty.layers.clear();
    empty.skip_sources.clear();
    const std::string text = describe(empty);
    CHECK(text.find("layer dilation spectn kernel_params out_channels\n") != std::string::npos);
    CHECK(parse_model_description(text).layers.empty());
}

TEST_CASE("linear preset with identity parameters is the identity map") {
    PointCloud pc;
    pc.points = oracle::random_points(24, 1);
    const SpectralBasis basis = basis_of(pc, 24, 4);  // full basis

    Network net(linear_preset(3));
    net.init_params(5);
    Matrix kernel = Matrix::Zero(7, 3);
    kernel.row(0).setOnes();  // identity filter for every channel
    net.params()["layer1.kernel"] = kernel;
    net.params()["layer1.mix.weight"] = Matrix::Identity(3, 3);
    net.params()["layer1.mix.bias"] = Matrix::Zero(1, 3);
    net.params()["head.weight"] = Matrix::Identity(3, 3);
    net.params()["head.bias"] = Matrix::Zero(1, 3);

    const Matrix out = net.predict(basis, {}, pc.points);
    CHECK((out - pc.points).norm() < 1e-9 * pc.points.norm());
}

TEST_CASE("zero input gives zero logits when biases are zero") {
    PointCloud pc;
    pc.points = oracle::random_points(20, 2);
    const SpectralBasis basis = basis_of(pc, 20, 4);

    ModelConfig config = linear_preset(2);
    Network net(config);
    net.init_params(6);
    net.params()["layer1.mix.bias"].setZero();
    net.params()["head.bias"].setZero();
    const Matrix out = net.predict(basis, {}, Matrix::Zero(20, 2));
    CHECK(out.norm() == 0.0);
}

TEST_CASE("paper10 forward: output shape and eval determinism") {
    const PointCloud pc = synth::two_part_shape(3, 120);
    REQUIRE(pc.size() == 120);
    const SpectralBasis basis = basis_of(pc, 60);

    ModelConfig config = paper10_preset(50, 3, HeadConfig{HeadKind::Segmentation, 4});
    config.spectn.resolution = 8;  // desk-sized transformer input
    config.spectn.conv1_channels = 4;
    config.spectn.conv2_channels = 8;
    config.spectn.hidden = 16;
    Network net(config);
    net.init_params(7);

    const Matrix voxels =
        voxelize_bases(pc, basis, config.spectn.resolution, config.spectn.k_local).values;
    FmapContext ctx{&voxels};

    const Matrix out1 = net.predict(basis, ctx, pc.points);
    const Matrix out2 = net.predict(basis, ctx, pc.points);
    CHECK(out1.rows() == pc.size());
    CHECK(out1.cols() == 4);
    CHECK((out1 - out2).norm() == 0.0);

    // Missing voxel context is a named prerequisite failure.
    CHECK_THROWS_AS(net.predict(basis, {}, pc.points), MissingPrerequisite);
}

TEST_CASE("permuting vertices permutes the output rows") {
    const PointCloud pc = synth::voxel_blob_shape(4, 8);
    const int n = pc.size();
    const SpectralBasis basis = basis_of(pc, 40);

    ModelConfig config = small_kernel_ablation(
        paper10_preset(8, 3, HeadConfig{HeadKind::Segmentation, 3}));
    Network net(config);
    net.init_params(8);

    const Matrix out = net.predict(basis, {}, pc.points);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(9);
    std::shuffle(perm.begin(), perm.end(), rng);

    PointCloud permuted;
    permuted.points.resize(n, 3);
    SpectralBasis permuted_basis;
    permuted_basis.eigenvalues = basis.eigenvalues;
    permuted_basis.vectors.resize(n, basis.count());
    for (int i = 0; i < n; ++i) {
        permuted.points.row(i) = pc.points.row(perm[i]);
        permuted_basis.vectors.row(i) = basis.vectors.row(perm[i]);
    }
    const Matrix out_permuted = net.predict(permuted_basis, {}, permuted.points);
    for (int i = 0; i < n; ++i)
        CHECK((out_permuted.row(i) - out.row(perm[i])).norm() < 1e-9);
}

TEST_CASE("train-mode dropout is reproducible; eval applies no masking") {
    const PointCloud pc = synth::voxel_blob_shape(5, 8);
    const SpectralBasis basis = basis_of(pc, 30);

    ModelConfig config = small_kernel_ablation(
        paper10_preset(4, 3, HeadConfig{HeadKind::Segmentation, 2}));
    config.dropout_rate = 0.5;
    Network net(config);
    net.init_params(10);

    ad::Tape t1, t2;
    const Matrix a =
        t1.value(net.forward(t1, basis, {}, pc.points, RunMode::Train, 1234).output);
    // Reset running statistics so the second train forward sees the same state.
    net.bn_states().assign(net.bn_states().size(), ad::BatchNormState{});
    const Matrix b =
        t2.value(net.forward(t2, basis, {}, pc.points, RunMode::Train, 1234).output);
    CHECK((a - b).norm() == 0.0);

    const Matrix e1 = net.predict(basis, {}, pc.points);
    const Matrix e2 = net.predict(basis, {}, pc.points);
    CHECK((e1 - e2).norm() == 0.0);
}

TEST_CASE("non-finite activations abort with the layer index") {
    const PointCloud pc = synth::voxel_blob_shape(6, 8);
    const SpectralBasis basis = basis_of(pc, 20);
    Network net(small_kernel_ablation(
        paper10_preset(4, 3, HeadConfig{HeadKind::Segmentation, 2})));
    net.init_params(11);
    net.params()["layer3.mix.weight"](0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        net.predict(basis, {}, pc.points);
        FAIL("expected NonFiniteActivation");
    } catch (const NonFiniteActivation& e) {
        CHECK(e.layer_index == 3);
    }
}

TEST_CASE("checkpoint save/load reproduces predictions exactly") {
    namespace fs = std::filesystem;
    const PointCloud pc = synth::voxel_blob_shape(7, 8);
    const SpectralBasis basis = basis_of(pc, 25);

    ModelConfig config = small_kernel_ablation(
        paper10_preset(4, 3, HeadConfig{HeadKind::Segmentation, 3}));
    Network net(config);
    net.init_params(12);

    // A couple of training steps so batch-norm state and step counter are
    // nontrivial.
    std::vector<TrainingShape> shapes(1);
    shapes[0].key = "s";
    shapes[0].features = pc.points;
    shapes[0].basis = basis;
    std::vector<int> labels(pc.size());
    for (int i = 0; i < pc.size(); ++i) labels[i] = i % 3;
    shapes[0].labels = labels;
    TrainOptions opts;
    opts.epochs = 2;
    opts.seed = 3;
    train_network(net, shapes, opts);

    const fs::path path = fs::temp_directory_path() / "sscnn_test_model.ckpt";
    save_checkpoint(path.string(), net);
    Network loaded = load_checkpoint(path.string());
    fs::remove(path);

    CHECK(describe(loaded.config()) == describe(net.config()));
    CHECK(loaded.step() == net.step());
    const Matrix a = net.predict(basis, {}, pc.points);
    const Matrix b = loaded.predict(basis, {}, pc.points);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("training is deterministic and lr=0 freezes the loss") {
    const PointCloud pc = synth::voxel_blob_shape(8, 8);
    const SpectralBasis basis = basis_of(pc, 20);
    std::vector<int> labels(pc.size());
    for (int i = 0; i < pc.size(); ++i) labels[i] = (pc.points(i, 2) > 0.5) ? 1 : 0;

    const auto make_shapes = [&] {
        std::vector<TrainingShape> shapes(1);
        shapes[0].key = "s";
        shapes[0].features = pc.points;
        shapes[0].basis = basis;
        shapes[0].labels = labels;
        return shapes;
    };
    const ModelConfig config = small_kernel_ablation(
        paper10_preset(4, 3, HeadConfig{HeadKind::Segmentation, 2}));

    TrainOptions opts;
    opts.epochs = 4;
    opts.seed = 77;

    Network n1(config), n2(config);
    n1.init_params(5);
    n2.init_params(5);
    auto s1 = make_shapes();
    auto s2 = make_shapes();
    const auto h1 = train_network(n1, s1, opts);
    const auto h2 = train_network(n2, s2, opts);
    REQUIRE(h1.size() == h2.size());
    for (size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].loss == h2[i].loss);

    Network frozen(config);
    frozen.init_params(5);
    frozen.config();
    TrainOptions zero = opts;
    zero.learning_rate = 0.0;
    zero.optimizer = "sgd";
    auto s3 = make_shapes();
    const auto h3 = train_network(frozen, s3, zero);
    for (size_t i = 1; i < h3.size(); ++i) CHECK(h3[i].loss == doctest::Approx(h3[0].loss));
}
