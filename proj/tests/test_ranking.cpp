#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rule/inference.hpp"
#include "rule/ranking.hpp"

using namespace rule;

TEST(ExpectedRank, StrictlyHighestIsOne) {
    std::vector<double> s = {0.1, 5.0, 0.3};
    EXPECT_DOUBLE_EQ(expected_rank(s, 1), 1.0);
}

TEST(ExpectedRank, TiedPairAtTopAveragesToOneAndAHalf) {
    std::vector<double> s = {5.0, 5.0, 0.3};
    EXPECT_DOUBLE_EQ(expected_rank(s, 0), 1.5);
    EXPECT_DOUBLE_EQ(expected_rank(s, 1), 1.5);
}

TEST(ExpectedRank, AllEqualGivesMidpoint) {
    std::vector<double> s(7, 1.0);
    EXPECT_DOUBLE_EQ(expected_rank(s, 3), 4.0);  // (7 + 1) / 2
}

TEST(ExpectedRank, MaskedEntitiesIgnored) {
    std::vector<double> s = {9.0, 5.0, 7.0};
    std::vector<uint8_t> mask = {1, 0, 0};
    EXPECT_DOUBLE_EQ(expected_rank(s, 1, &mask), 2.0);
    mask = {1, 0, 1};
    EXPECT_DOUBLE_EQ(expected_rank(s, 1, &mask), 1.0);
}

TEST(ExpectedRank, MaskedTrueAnswerThrows) {
    std::vector<double> s = {1.0, 2.0};
    std::vector<uint8_t> mask = {1, 0};
    EXPECT_THROW(expected_rank(s, 0, &mask), std::invalid_argument);
}

TEST(ExpectedRank, MatchesMonteCarloShuffleOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> val(0, 4);  // few levels -> many ties
    for (int rep = 0; rep < 100; ++rep) {
        size_t n = 5 + static_cast<size_t>(rep % 20);
        std::vector<double> scores(n);
        for (double& v : scores) v = static_cast<double>(val(rng));
        size_t true_idx = static_cast<size_t>(rng() % n);
        std::vector<uint8_t> mask(n, 0);
        for (size_t i = 0; i < n / 4; ++i) mask[rng() % n] = 1;
        mask[true_idx] = 0;
        double closed = expected_rank(scores, true_idx, &mask);
        auto [mc, sem] = oracle::shuffled_rank(scores, true_idx, &mask, 10000, rep);
        EXPECT_NEAR(closed, mc, std::max(3.0 * sem, 1e-9)) << "rep " << rep;
    }
}

TEST(ExpectedRank, InvariantUnderMonotoneTransforms) {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> s(20);
        for (double& v : s) v = d(rng);
        s[4] = s[11];  // inject a tie
        std::vector<double> t(s.size());
        for (size_t i = 0; i < s.size(); ++i) t[i] = 2.0 * s[i] + 7.0;
        std::vector<double> e(s.size());
        for (size_t i = 0; i < s.size(); ++i) e[i] = std::exp(s[i]);
        for (size_t idx : {size_t{0}, size_t{4}, size_t{11}}) {
            double base = expected_rank(s, idx);
            EXPECT_DOUBLE_EQ(expected_rank(t, idx), base);
            EXPECT_DOUBLE_EQ(expected_rank(e, idx), base);
        }
    }
}

TEST(EvalReport, ArithmeticOnTwoRanks) {
    EvalReport r;
    r.add_rank(1.0, false);
    r.add_rank(4.0, false);
    r.finalize();
    EXPECT_DOUBLE_EQ(r.mrr, 0.625);
    EXPECT_DOUBLE_EQ(r.hits1, 0.5);
    EXPECT_DOUBLE_EQ(r.hits3, 0.5);
    EXPECT_DOUBLE_EQ(r.hits10, 1.0);
}

TEST(EvalReport, SingleRankOne) {
    EvalReport r;
    r.add_rank(1.0, false);
    r.finalize();
    EXPECT_DOUBLE_EQ(r.mrr, 1.0);
    EXPECT_DOUBLE_EQ(r.hits1, 1.0);
}

TEST(EvalReport, HitsMonotoneAndMatchesBruteForce) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> d(1.0, 40.0);
    EvalReport r;
    std::vector<double> ranks;
    for (int i = 0; i < 500; ++i) {
        double rank = d(rng);
        ranks.push_back(rank);
        r.add_rank(rank, true);
    }
    r.finalize();
    double mrr = 0, h1 = 0, h3 = 0, h10 = 0;
    for (double rank : ranks) {
        mrr += 1.0 / rank;
        h1 += rank <= 1;
        h3 += rank <= 3;
        h10 += rank <= 10;
    }
    double n = static_cast<double>(ranks.size());
    EXPECT_DOUBLE_EQ(r.mrr, mrr / n);
    EXPECT_DOUBLE_EQ(r.hits1, h1 / n);
    EXPECT_DOUBLE_EQ(r.hits3, h3 / n);
    EXPECT_DOUBLE_EQ(r.hits10, h10 / n);
    EXPECT_LE(r.hits1, r.hits3);
    EXPECT_LE(r.hits3, r.hits10);
    EXPECT_EQ(r.ranks.size(), ranks.size());
}

namespace {

std::vector<size_t> argsort_desc(const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] > v[b]; });
    return idx;
}

}  // namespace

TEST(IntegratedScore, BetaZeroPreservesKgeRanking) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    std::vector<double> kge(30), g(30);
    for (size_t i = 0; i < 30; ++i) {
        kge[i] = d(rng);
        g[i] = d(rng);
    }
    for (ScoreMode mode : {ScoreMode::RawSum, ScoreMode::Normalized}) {
        auto out = integrated_score(kge, g, 0.0, mode);
        EXPECT_EQ(argsort_desc(out), argsort_desc(kge));
    }
}

TEST(IntegratedScore, BetaOneNormalizedPreservesGroundingRanking) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    std::vector<double> kge(30), g(30);
    for (size_t i = 0; i < 30; ++i) {
        kge[i] = d(rng);
        g[i] = d(rng);
    }
    auto out = integrated_score(kge, g, 1.0, ScoreMode::Normalized);
    EXPECT_EQ(argsort_desc(out), argsort_desc(g));
}

TEST(IntegratedScore, AffineMapHitsKgeEndpoints) {
    std::vector<double> kge = {-2.0, 4.0};
    std::vector<double> g = {0.0, 10.0};
    auto out = integrated_score(kge, g, 1.0, ScoreMode::Normalized);
    EXPECT_DOUBLE_EQ(out[0], -2.0);
    EXPECT_DOUBLE_EQ(out[1], 4.0);
}

TEST(IntegratedScore, ConstantGroundingMapsToMidpoint) {
    std::vector<double> kge = {-2.0, 4.0, 1.0};
    std::vector<double> g = {3.0, 3.0, 3.0};
    auto out = integrated_score(kge, g, 1.0, ScoreMode::Normalized);
    for (double v : out) EXPECT_DOUBLE_EQ(v, 1.0);  // (-2 + 4) / 2
}

TEST(IntegratedScore, RawSumIsPlainWeightedSum) {
    std::vector<double> kge = {1.0, 2.0};
    std::vector<double> g = {10.0, -4.0};
    auto out = integrated_score(kge, g, 0.5, ScoreMode::RawSum);
    EXPECT_DOUBLE_EQ(out[0], 6.0);
    EXPECT_DOUBLE_EQ(out[1], 0.0);
}

TEST(IntegratedScore, LengthMismatchThrows) {
    std::vector<double> a = {1.0}, b = {1.0, 2.0};
    EXPECT_THROW(integrated_score(a, b, 0.5, ScoreMode::RawSum), std::invalid_argument);
}
