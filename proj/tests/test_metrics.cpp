#include <gtest/gtest.h>

#include <random>

#include "eyas/error.hpp"
#include "eyas/metrics.hpp"
#include "support.hpp"

using namespace eyas;

namespace {

BinaryMask from_points(int w, int h, std::initializer_list<std::pair<int, int>> pts) {
    BinaryMask m(w, h);
    for (auto [x, y] : pts) m.set(x, y, true);
    return m;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::internal;
}

}  // namespace

TEST(Iou, IdenticalAndDisjoint) {
    const BinaryMask a = from_points(4, 4, {{0, 0}, {1, 1}});
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    EXPECT_DOUBLE_EQ(iou(a, from_points(4, 4, {{3, 3}})), 0.0);
}

TEST(Iou, ThirdOverlapPair) {
    const BinaryMask a = from_points(3, 3, {{0, 0}, {0, 1}});
    const BinaryMask b = from_points(3, 3, {{0, 1}, {0, 2}});
    EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(dice(a, b), 0.5);
}

TEST(Iou, EmptyPairIsOne) {
    EXPECT_DOUBLE_EQ(iou(BinaryMask(4, 4), BinaryMask(4, 4)), 1.0);
    EXPECT_DOUBLE_EQ(dice(BinaryMask(4, 4), BinaryMask(4, 4)), 1.0);
}

TEST(Iou, DimensionMismatch) {
    EXPECT_EQ(code_of([] { iou(BinaryMask(4, 4), BinaryMask(4, 5)); }), ErrorCode::dimension_mismatch);
}

TEST(PrecisionRecall, SubsetCase) {
    BinaryMask truth(10, 1), pred(10, 1);
    for (int x = 0; x < 10; ++x) truth.set(x, 0, true);
    for (int x = 0; x < 5; ++x) pred.set(x, 0, true);
    EXPECT_DOUBLE_EQ(precision(pred, truth), 1.0);
    EXPECT_DOUBLE_EQ(recall(pred, truth), 0.5);
}

TEST(PrecisionRecall, EmptyDenominatorsAreErrors) {
    const BinaryMask some = from_points(2, 2, {{0, 0}});
    EXPECT_EQ(code_of([&] { precision(BinaryMask(2, 2), some); }), ErrorCode::undefined_metric);
    EXPECT_EQ(code_of([&] { recall(some, BinaryMask(2, 2)); }), ErrorCode::undefined_metric);
}

TEST(MetricProperties, RandomPairs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> density(0.05, 0.95);
    for (int i = 0; i < 300; ++i) {
        const BinaryMask a = eyas::testing::random_mask(rng, 16, 16, density(rng));
        const BinaryMask b = eyas::testing::random_mask(rng, 16, 16, density(rng));
        const double j = iou(a, b), d = dice(a, b);
        EXPECT_LE(j, d);
        if (j > 0.0 && j < 1.0) EXPECT_LT(j, d);
        EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
        EXPECT_DOUBLE_EQ(precision(a, b), recall(b, a));
        EXPECT_NEAR(d, 2 * j / (1 + j), 1e-12);
    }
}

TEST(Confusion, HandCount) {
    const auto cm = confusion({"A", "B", "B", "B"}, {"A", "A", "B", "B"}, {"A", "B"});
    EXPECT_EQ(cm.counts[0][0], 1u);
    EXPECT_EQ(cm.counts[0][1], 1u);
    EXPECT_EQ(cm.counts[1][1], 2u);
    EXPECT_DOUBLE_EQ(accuracy(cm), 0.75);
    const auto per = per_class_accuracy(cm);
    EXPECT_DOUBLE_EQ(per.at("A"), 0.5);
    EXPECT_DOUBLE_EQ(per.at("B"), 1.0);
}

TEST(Confusion, PerfectAndEmptyRows) {
    const auto cm = confusion({"A", "A"}, {"A", "A"}, {"A", "B", "C"});
    EXPECT_DOUBLE_EQ(accuracy(cm), 1.0);
    const auto per = per_class_accuracy(cm);
    EXPECT_EQ(per.size(), 1u);
    EXPECT_DOUBLE_EQ(per.at("A"), 1.0);
}

TEST(Confusion, RowSumsAreTruthCounts) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> pick(0, 2);
    const std::vector<std::string> labels{"x", "y", "z"};
    std::vector<std::string> p, t;
    for (int i = 0; i < 200; ++i) {
        p.push_back(labels[pick(rng)]);
        t.push_back(labels[pick(rng)]);
    }
    const auto cm = confusion(p, t, labels);
    for (std::size_t r = 0; r < 3; ++r) {
        std::size_t sum = 0;
        for (auto c : cm.counts[r]) sum += c;
        EXPECT_EQ(sum, static_cast<std::size_t>(std::count(t.begin(), t.end(), labels[r])));
    }
    EXPECT_EQ(cm.total(), 200u);
}

TEST(Confusion, Errors) {
    EXPECT_EQ(code_of([] { confusion({"A"}, {"A", "B"}, {"A", "B"}); }), ErrorCode::length_mismatch);
    EXPECT_EQ(code_of([] { confusion({"A"}, {"C"}, {"A", "B"}); }), ErrorCode::unknown_label);
}

TEST(SegmentationAccumulator, SkipsUndefinedPrecision) {
    SegmentationAccumulator acc;
    const BinaryMask a = from_points(2, 2, {{0, 0}});
    acc.add(a, a);
    acc.add(BinaryMask(2, 2), a);
    const auto s = acc.summary();
    EXPECT_EQ(s.count, 2u);
    EXPECT_DOUBLE_EQ(s.mean_iou, 0.5);
    EXPECT_DOUBLE_EQ(s.mean_precision, 1.0);
    EXPECT_DOUBLE_EQ(s.mean_recall, 0.5);
}
