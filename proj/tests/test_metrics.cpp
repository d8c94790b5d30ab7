// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "spoterkit/errors.hpp"
#include "spoterkit/metrics.hpp"
#include "spoterkit/random.hpp"
#include "oracles.hpp"

using namespace spoterkit;

TEST(Softmax, HandComputedValues) {
    const auto p = softmax(std::vector<double>{2, 1, 0});
    EXPECT_NEAR(p[0], 0.6652, 5e-5);
    EXPECT_NEAR(p[1], 0.2447, 5e-5);
    EXPECT_NEAR(p[2], 0.0900, 5e-5);
}

TEST(Softmax, StableForLargeLogitsAndSumsToOne) {
    const auto p = softmax(std::vector<double>{1000, 1000, -1000});
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_EQ(p[2], 0.0);
    Rng rng(41);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> l(17);
        for (auto& v : l) v = rng.uniform(-30, 30);
        const auto q = softmax(l);
        EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(TopK, OrderAndTieBreak) {
    EXPECT_EQ(top_k_indices(std::vector<double>{0.1, 0.5, 0.4}, 3), (std::vector<std::size_t>{1, 2, 0}));
    EXPECT_EQ(top_k_indices(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 4), (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(top_k_indices(std::vector<double>{0.2, 0.4, 0.4}, 1), (std::vector<std::size_t>{1}));
    EXPECT_THROW(top_k_indices(std::vector<double>{0.5, 0.5}, 0), InvalidK);
    EXPECT_THROW(top_k_indices(std::vector<double>{0.5, 0.5}, 3), InvalidK);
}

TEST(TopK, MatchesFullSortOracleWithTies) {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> logits(2 + rng.below(12));
        for (auto& v : logits) v = static_cast<double>(rng.below(4));
        const auto p = softmax(logits);
        for (std::size_t k = 1; k <= p.size(); ++k) {
            ASSERT_EQ(top_k_indices(p, k), spoterkit::testing::full_sort_top_k(p, k));
        }
    }
}

TEST(RankPredictions, FullSoftmaxNotRenormalised) {
    const GlossVocabulary vocab({"a", "b", "c"});
    const auto pred = rank_predictions(std::vector<double>{2, 1, 0}, vocab, 2);
    ASSERT_EQ(pred.ranked.size(), 2u);
    EXPECT_EQ(pred.ranked[0].gloss, "a");
    EXPECT_EQ(pred.ranked[1].gloss, "b");
    EXPECT_NEAR(pred.ranked[0].probability + pred.ranked[1].probability, 0.6652 + 0.2447, 1e-4);
    const auto equal = rank_predictions(std::vector<double>{3, 3, 3}, vocab, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(equal.ranked[i].index, i);
        EXPECT_NEAR(equal.ranked[i].probability, 1.0 / 3.0, 1e-15);
    }
}

TEST(MetricsTally, TwoClassExample) {
    MetricsTally t(2);
    t.add(0, std::vector<double>{0.9, 0.1});
    t.add(1, std::vector<double>{0.8, 0.2});
    const auto m = t.result();
    EXPECT_DOUBLE_EQ(m.top1_macro, 0.5);
    EXPECT_DOUBLE_EQ(m.top1_micro, 0.5);
}

TEST(MetricsTally, ThreeClassExample) {
    MetricsTally t(3);
    t.add(0, std::vector<double>{1, 0, 0});  // hit
    t.add(1, std::vector<double>{0, 1, 0});  // hit
    t.add(1, std::vector<double>{1, 0, 0});  // miss
    t.add(2, std::vector<double>{1, 0, 0});  // miss
    const auto m = t.result();
    EXPECT_DOUBLE_EQ(m.top1_macro, 0.5);
    EXPECT_DOUBLE_EQ(m.top1_micro, 0.5);
    EXPECT_EQ(m.per_class_accuracy[1], std::optional<double>(0.5));
}

TEST(MetricsTally, AbsentClassesAreExcludedFromMacro) {
    MetricsTally t(4);
    t.add(0, std::vector<double>{1, 0, 0, 0});
    t.add(2, std::vector<double>{1, 0, 0, 0});
    const auto m = t.result();
    EXPECT_DOUBLE_EQ(m.top1_macro, 0.5);
    EXPECT_FALSE(m.per_class_accuracy[1].has_value());
    EXPECT_FALSE(m.per_class_accuracy[3].has_value());
}

TEST(MetricsTally, TopFiveCountsMembership) {
    MetricsTally t(6);
    t.add(5, std::vector<double>{6, 5, 4, 3, 2, 1});  // rank 6: miss
    t.add(4, std::vector<double>{6, 5, 4, 3, 2, 1});  // rank 5: hit
    EXPECT_DOUBLE_EQ(t.result().top5_micro, 0.5);
}
