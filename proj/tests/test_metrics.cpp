#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sscnn/errors.hpp"
#include "sscnn/metrics.hpp"
#include "support/oracles.hpp"

using namespace sscnn;

TEST_CASE("iou basics") {
    CHECK(iou({0, 1, 2, 1}, {0, 1, 2, 1}).mean == 1.0);

    const IouResult r = iou({0, 1, 1, 1}, {0, 0, 1, 1});
    CHECK(r.per_part.at(0) == doctest::Approx(0.5));
    CHECK(r.per_part.at(1) == doctest::Approx(2.0 / 3.0));
    CHECK(r.mean == doctest::Approx(7.0 / 12.0));

    // Parts absent from both sides are skipped: only labels 0 and 3 count.
    const IouResult skipped = iou({0, 0, 3}, {0, 3, 3});
    CHECK(skipped.per_part.size() == 2);
}

TEST_CASE("iou matches a brute-force set-counting oracle") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> label(0, 5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> pred(200), truth(200);
        for (int i = 0; i < 200; ++i) {
            pred[i] = label(rng);
            truth[i] = label(rng);
        }
        const IouResult r = iou(pred, truth);
        double total = 0.0;
        int parts = 0;
        for (int p = 0; p <= 5; ++p) {
            long inter = 0, uni = 0;
            for (int i = 0; i < 200; ++i) {
                if (pred[i] == p && truth[i] == p) ++inter;
                if (pred[i] == p || truth[i] == p) ++uni;
            }
            if (uni == 0) continue;
            ++parts;
            total += double(inter) / double(uni);
            CHECK(r.per_part.at(p) == doctest::Approx(double(inter) / double(uni)));
        }
        CHECK(r.mean == doctest::Approx(total / parts));
    }
}

TEST_CASE("iou is invariant to consistent relabeling") {
    std::vector<int> pred{0, 1, 2, 2, 1, 0}, truth{0, 2, 2, 1, 1, 0};
    const double before = iou(pred, truth).mean;
    const int remap[3] = {5, 3, 9};
    for (int& v : pred) v = remap[v];
    for (int& v : truth) v = remap[v];
    CHECK(iou(pred, truth).mean == doctest::Approx(before));
}

TEST_CASE("category mean iou is the shape-count weighted average") {
    std::map<int, CategoryIou> one{{0, {4, 0.9}}};
    CHECK(category_mean_iou(one) == doctest::Approx(0.9));

    std::map<int, CategoryIou> two{{0, {3, 0.8}}, {1, {1, 0.6}}};
    CHECK(category_mean_iou(two) == doctest::Approx(0.75));

    // 16-category random fixture against an independent accumulation.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::map<int, CategoryIou> many;
    double weighted = 0.0;
    long count = 0;
    for (int c = 0; c < 16; ++c) {
        const int shapes = 1 + static_cast<int>(unit(rng) * 20);
        const double value = unit(rng);
        many[c] = {shapes, value};
        weighted += shapes * value;
        count += shapes;
    }
    CHECK(category_mean_iou(many) == doctest::Approx(weighted / count).epsilon(1e-12));

    double lo = 1.0, hi = 0.0;
    for (const auto& [c, e] : many) {
        lo = std::min(lo, e.mean_iou);
        hi = std::max(hi, e.mean_iou);
    }
    const double mean = category_mean_iou(many);
    CHECK(mean >= lo);
    CHECK(mean <= hi);
}

TEST_CASE("majority vote classification") {
    const std::map<int, int> table{{0, 0}, {1, 0}, {2, 1}, {3, 1}};
    CHECK(majority_vote_classify({0, 1, 0, 1}, table) == 0);
    CHECK(majority_vote_classify({0, 0, 2, 2, 2}, table) == 1);  // 60/40 split
    CHECK(majority_vote_classify({0, 2}, table) == 0);           // tie -> lowest id
    CHECK_THROWS_AS(majority_vote_classify({7}, table), UnknownLabelError);

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> label(0, 3);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<int> pred(101);
        long votes[2] = {0, 0};
        for (int& v : pred) {
            v = label(rng);
            ++votes[table.at(v)];
        }
        const int expected = votes[1] > votes[0] ? 1 : 0;
        CHECK(majority_vote_classify(pred, table) == expected);
    }
}

TEST_CASE("pck curve") {
    KeypointResult perfect;
    perfect.predicted = oracle::random_points(5, 4);
    perfect.truth = perfect.predicted;
    const auto ones = pck({perfect}, {0.001, 0.01, 0.1});
    for (double v : ones) CHECK(v == 1.0);

    KeypointResult off;
    off.predicted.resize(1, 3);
    off.truth.resize(1, 3);
    off.truth << 0.5, 0.5, 0.5;
    off.predicted << 0.55, 0.5, 0.5;  // error 0.05
    const auto curve = pck({off}, {0.01, 0.1});
    CHECK(curve[0] == 0.0);
    CHECK(curve[1] == 1.0);

    // Monotone non-decreasing and bounded on a random fixture.
    std::vector<KeypointResult> results;
    for (int s = 0; s < 10; ++s) {
        KeypointResult r;
        r.predicted = oracle::random_points(10, 100 + s);
        r.truth = oracle::random_points(10, 200 + s);
        results.push_back(r);
    }
    std::vector<double> thresholds;
    for (int t = 0; t <= 30; ++t) thresholds.push_back(0.05 * t);
    const auto c = pck(results, thresholds);
    for (size_t i = 0; i < c.size(); ++i) {
        CHECK(c[i] >= 0.0);
        CHECK(c[i] <= 1.0);
        if (i) CHECK(c[i] >= c[i - 1]);
    }
    CHECK_THROWS_AS(pck(results, {0.2, 0.1}), BadSpecError);
}

TEST_CASE("normal error: exact, flipped and oracle cases") {
    Eigen::Matrix<double, Eigen::Dynamic, 3> truth(2, 3);
    truth << 1, 0, 0, 0, 1, 0;
    CHECK(normal_error(truth, truth).mean_angle_deg == doctest::Approx(0.0));
    CHECK(normal_error(truth, truth).l2 == doctest::Approx(0.0));

    const NormalErrorResult flipped = normal_error((-truth).eval(), truth);
    CHECK(flipped.mean_angle_deg == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(flipped.l2 == doctest::Approx(4.0));  // ||-g - g||^2 = 4 per unit normal

    // Zero-norm predictions are counted and excluded from the angle.
    Eigen::Matrix<double, Eigen::Dynamic, 3> zeroed = truth;
    zeroed.row(1).setZero();
    const NormalErrorResult with_zero = normal_error(zeroed, truth);
    CHECK(with_zero.zero_norm_count == 1);
    CHECK(with_zero.mean_angle_deg == doctest::Approx(0.0));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Matrix<double, Eigen::Dynamic, 3> pred(50, 3), gt(50, 3);
    for (int i = 0; i < 50; ++i) {
        Eigen::RowVector3d g(gauss(rng), gauss(rng), gauss(rng));
        gt.row(i) = g / g.norm();
        pred.row(i) << gauss(rng), gauss(rng), gauss(rng);
    }
    const NormalErrorResult r = normal_error(pred, gt);
    double angle = 0.0, l2 = 0.0;
    for (int i = 0; i < 50; ++i) {
        l2 += (pred.row(i) - gt.row(i)).squaredNorm();
        const double cosine =
            std::abs(pred.row(i).dot(gt.row(i))) / pred.row(i).norm();
        angle += std::acos(std::min(1.0, cosine)) * 180.0 / std::numbers::pi;
    }
    CHECK(r.l2 == doctest::Approx(l2 / 50).epsilon(1e-12));
    CHECK(r.mean_angle_deg == doctest::Approx(angle / 50).epsilon(1e-12));
}
