#include <gtest/gtest.h>

#include <map>

#include "rule/sampling.hpp"

using namespace rule;

TEST(NegativeTriplets, CorruptedSideDiffersOnTinyGraph) {
    GraphIndex g({{0, 0, 1}}, 2, 1);
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        auto negs = sample_negative_triplets({0, 0, 1}, g, 1, rng);
        ASSERT_EQ(negs.size(), 1u);
        EXPECT_FALSE(g.has(negs[0]));
        // exactly one side changed
        bool head_changed = negs[0].head != 0;
        bool tail_changed = negs[0].tail != 1;
        EXPECT_NE(head_changed, tail_changed);
        EXPECT_EQ(negs[0].rel, 0);
    }
}

TEST(NegativeTriplets, UniformOverValidCorruptions) {
    // 6 entities, single fact (0, r, 1); valid head corruptions {1..5}->? wait:
    // corrupting head gives (e, r, 1) for e != 0, all absent from K; tails same.
    GraphIndex g({{0, 0, 1}}, 6, 1);
    Rng rng(99);
    std::map<Triplet, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto negs = sample_negative_triplets({0, 0, 1}, g, 1, rng);
        ++counts[negs[0]];
    }
    // half the draws corrupt the head (6 candidates incl. the original head
    // value would recreate the positive and be filtered; 5 usable), half the
    // tail. Chi-squared against the uniform split across the 10 outcomes.
    EXPECT_EQ(counts.size(), 10u);
    double expected = draws / 10.0;
    double chi2 = 0.0;
    for (const auto& [t, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    // 9 dof, p=0.001 critical value ~27.88
    EXPECT_LT(chi2, 27.88);
}

TEST(NegativeTriplets, HeadAndTailCorruptionBalanced) {
    GraphIndex g({{0, 0, 1}}, 8, 1);
    Rng rng(5);
    int head = 0, tail = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto negs = sample_negative_triplets({0, 0, 1}, g, 1, rng);
        if (negs[0].head != 0) ++head;
        if (negs[0].tail != 1) ++tail;
    }
    EXPECT_EQ(head + tail, draws);
    EXPECT_NEAR(head, draws / 2, 4 * std::sqrt(draws / 4.0));
}

TEST(NegativeTriplets, RequestedCountReturned) {
    GraphIndex g({{0, 0, 1}, {1, 0, 2}}, 3, 1);
    Rng rng(2);
    EXPECT_EQ(sample_negative_triplets({0, 0, 1}, g, 7, rng).size(), 7u);
}

TEST(NegativeRules, ExactlyOneSlotDiffers) {
    RuleSet rules(std::vector<Rule>{Rule{2, {0, 1}}});
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        auto negs = sample_negative_rules(rules[0], 6, rules, 1, rng);
        ASSERT_EQ(negs.size(), 1u);
        const Rule& n = negs[0];
        int diffs = (n.head != 2) + (n.body[0] != 0) + (n.body[1] != 1);
        EXPECT_EQ(diffs, 1);
        EXPECT_EQ(n.body.size(), 2u);
        EXPECT_FALSE(rules.contains(n));
    }
}

TEST(NegativeRules, ReplacementNeverEqualsOriginal) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    Rng rng(4);
    for (int i = 0; i < 300; ++i) {
        auto negs = sample_negative_rules(rules[0], 5, rules, 2, rng);
        for (const Rule& n : negs) {
            if (n.head != 1) EXPECT_NE(n.head, 1);
            if (n.body[0] != 0) EXPECT_NE(n.body[0], 0);
        }
    }
}

TEST(NegativeRules, HeadVsBodyBalancedForLengthOneRules) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    Rng rng(6);
    int head = 0, body = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto negs = sample_negative_rules(rules[0], 8, rules, 1, rng);
        if (negs[0].head != 1) ++head;
        if (negs[0].body[0] != 0) ++body;
    }
    EXPECT_EQ(head + body, draws);
    EXPECT_NEAR(head, draws / 2, 4 * std::sqrt(draws / 4.0));
}
