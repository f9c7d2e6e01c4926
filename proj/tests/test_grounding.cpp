#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rule/confidence.hpp"
#include "rule/grounding.hpp"

using namespace rule;

namespace {

// the running two-rule example: e1 -r1-> e2 -r2-> e6 and e1 -r7-> e5 -r8-> e6,
// query relation r3. Entity ids: e1=0, e2=1, e5=2, e6=3. Relations r1=0,
// r2=1, r3=2, r7=3, r8=4.
GraphIndex figure_graph() {
    return GraphIndex({{0, 0, 1}, {1, 1, 3}, {0, 3, 2}, {2, 4, 3}}, 4, 5);
}

RuleSet figure_rules() {
    // R1: r1 ^ r2 -> r3; R2: decoy; R3: r7 ^ r8 -> r3
    return RuleSet(std::vector<Rule>{Rule{2, {0, 1}}, Rule{2, {0, 4}}, Rule{2, {3, 4}}});
}

}  // namespace

TEST(GroundQuery, TwoRuleExampleActivatesBoth) {
    GraphIndex g = figure_graph();
    RuleSet rules = figure_rules();
    SupportTable t = ground_query(g, 0, 2, rules);
    ASSERT_EQ(t.rows.size(), 1u);  // only e6 reachable by full bodies
    EXPECT_EQ(t.support(3, 0), 1);
    EXPECT_EQ(t.support(3, 1), 0);
    EXPECT_EQ(t.support(3, 2), 1);
}

TEST(GroundQuery, EncodingMatchesConfidenceTimesSupport) {
    GraphIndex g = figure_graph();
    RuleSet rules = figure_rules();
    SupportTable t = ground_query(g, 0, 2, rules);
    std::vector<double> w = {0.9, 0.5, 0.7};
    SparseEncoding v = encode_soft_multihot(t.rows.at(3), w);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].first, 0);
    EXPECT_DOUBLE_EQ(v[0].second, 0.9);  // w1 * 1
    EXPECT_EQ(v[1].first, 2);
    EXPECT_DOUBLE_EQ(v[1].second, 0.7);  // w3 * 1
}

TEST(GroundQuery, NoMatchingPathsGivesEmptyTable) {
    GraphIndex g({{0, 0, 1}}, 2, 3);
    RuleSet rules(std::vector<Rule>{Rule{2, {1}}});
    EXPECT_TRUE(ground_query(g, 0, 2, rules).empty());
    // rules exist for a different head relation only
    EXPECT_TRUE(ground_query(g, 0, 1, rules).empty());
}

TEST(GroundQuery, DiamondCountsParallelWalks) {
    // two r1-r2 chains from 0 to 3
    GraphIndex g({{0, 0, 1}, {0, 0, 2}, {1, 1, 3}, {2, 1, 3}}, 4, 3);
    RuleSet rules(std::vector<Rule>{Rule{2, {0, 1}}});
    SupportTable t = ground_query(g, 0, 2, rules);
    EXPECT_EQ(t.support(3, 0), 2);
}

TEST(GroundQuery, WalksMayRevisitEntities) {
    // cycle 0 -> 1 -> 0 -> 1: body r0,r0,r0 reaches 1 via a revisiting walk
    GraphIndex g({{0, 0, 1}, {1, 0, 0}}, 2, 2);
    RuleSet rules(std::vector<Rule>{Rule{1, {0, 0, 0}}});
    SupportTable t = ground_query(g, 0, 1, rules);
    EXPECT_EQ(t.support(1, 0), 1);
}

TEST(GroundQuery, ExclusionsRemoveEdgesDuringTraversal) {
    GraphIndex g = figure_graph();
    RuleSet rules = figure_rules();
    EdgeExclusions excl{Triplet{0, 0, 1}};  // removes the only r1 edge
    SupportTable t = ground_query(g, 0, 2, rules, excl);
    EXPECT_EQ(t.support(3, 0), 0);
    EXPECT_EQ(t.support(3, 2), 1);  // the r7-r8 chain is untouched
}

TEST(GroundQuery, MatchesExhaustiveWalkOracle) {
    int graphs_checked = 0;
    for (uint64_t seed = 0; seed < 25; ++seed) {
        int n = 4 + static_cast<int>(seed % 12);
        auto triplets = oracle::random_graph(n, 4, 3 * n, seed * 3 + 1);
        GraphIndex g(triplets, n, 4);
        std::mt19937_64 rng(seed);
        std::vector<Rule> rs;
        for (int i = 0; i < 6; ++i) {
            Rule r;
            r.head = static_cast<RelationId>(rng() % 4);
            size_t len = 1 + rng() % 3;
            for (size_t j = 0; j < len; ++j) r.body.push_back(static_cast<RelationId>(rng() % 4));
            rs.push_back(r);
        }
        RuleSet rules(rs);
        GroundingEngine engine(g, rules);
        for (EntityId h = 0; h < n; ++h) {
            for (RelationId q = 0; q < 4; ++q) {
                SupportTable t = engine.ground(h, q);
                for (size_t i = 0; i < rules.size(); ++i) {
                    if (rules[static_cast<RuleId>(i)].head != q) continue;
                    auto expect =
                        oracle::walk_terminals(g, h, rules[static_cast<RuleId>(i)].body);
                    for (EntityId e = 0; e < n; ++e) {
                        int64_t want = expect.count(e) ? expect.at(e) : 0;
                        EXPECT_EQ(t.support(e, static_cast<RuleId>(i)), want)
                            << "seed " << seed << " h " << h << " q " << q << " rule " << i;
                    }
                }
            }
        }
        ++graphs_checked;
    }
    EXPECT_EQ(graphs_checked, 25);
}

TEST(GroundQuery, ExclusionOracleAgreement) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto triplets = oracle::random_graph(8, 3, 24, seed + 60);
        GraphIndex g(triplets, 8, 3);
        RuleSet rules(std::vector<Rule>{Rule{0, {1, 2}}, Rule{0, {2}}});
        GroundingEngine engine(g, rules);
        Triplet banned = triplets[seed % triplets.size()];
        EdgeExclusions excl{banned};
        SupportTable t = engine.ground(banned.head, 0, excl);
        for (EntityId e = 0; e < 8; ++e) {
            auto w1 = oracle::count_walks(g, banned.head, rules[0].body, 0, e, {banned});
            auto w2 = oracle::count_walks(g, banned.head, rules[1].body, 0, e, {banned});
            EXPECT_EQ(t.support(e, 0), w1);
            EXPECT_EQ(t.support(e, 1), w2);
        }
    }
}

TEST(Encoding, ZeroSupportsGiveEmptyEncoding) {
    std::vector<double> w = {1.0, 2.0};
    EXPECT_TRUE(encode_soft_multihot({}, w).empty());
}

TEST(Encoding, ProductOfConfidenceAndCount) {
    std::vector<double> w = {0.0, 6.5};
    SparseEncoding v = encode_soft_multihot({{1, 2}}, w);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_DOUBLE_EQ(v[0].second, 13.0);
}

TEST(Encoding, MonotoneInSupportWhenConfidencePositive) {
    std::vector<double> w = {0.5};
    double v1 = encode_soft_multihot({{0, 1}}, w)[0].second;
    double v2 = encode_soft_multihot({{0, 2}}, w)[0].second;
    double v9 = encode_soft_multihot({{0, 9}}, w)[0].second;
    EXPECT_LT(v1, v2);
    EXPECT_LT(v2, v9);
}

TEST(Encoding, HardModeUsesRawCounts) {
    SparseEncoding v = encode_hard_multihot({{2, 3}, {0, 1}});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].first, 0);
    EXPECT_DOUBLE_EQ(v[0].second, 1.0);
    EXPECT_DOUBLE_EQ(v[1].second, 3.0);
}

TEST(Encoding, FineGrainedPerDimension) {
    // c_1 = {3.9, 3.7}; support 1 -> encoding j picks component j
    std::vector<double> conf_matrix = {3.9, 3.7};
    SparseEncoding v0 = encode_soft_multihot_fg({{0, 1}}, conf_matrix, 2, 0);
    SparseEncoding v1 = encode_soft_multihot_fg({{0, 1}}, conf_matrix, 2, 1);
    EXPECT_DOUBLE_EQ(v0[0].second, 3.9);
    EXPECT_DOUBLE_EQ(v1[0].second, 3.7);
}

TEST(Aggregators, SumAndMaxExamples) {
    std::vector<double> w = {2.0, 5.0};
    std::vector<std::pair<RuleId, int32_t>> row = {{0, 1}, {1, 1}};
    EXPECT_DOUBLE_EQ(aggregate_sum(row, w), 7.0);
    EXPECT_DOUBLE_EQ(aggregate_max(row, w), 5.0);
}

TEST(Aggregators, SingleActivatedRuleSumEqualsMax) {
    std::vector<double> w = {0.0, 3.0};
    std::vector<std::pair<RuleId, int32_t>> row = {{1, 1}};
    EXPECT_DOUBLE_EQ(aggregate_sum(row, w), aggregate_max(row, w));
}

TEST(Aggregators, SumScalesWithSupportMaxDoesNot) {
    std::vector<double> w = {2.0};
    std::vector<std::pair<RuleId, int32_t>> row = {{0, 3}};
    EXPECT_DOUBLE_EQ(aggregate_sum(row, w), 6.0);
    EXPECT_DOUBLE_EQ(aggregate_max(row, w), 2.0);
}

TEST(Confidence, ZeroDistanceGivesFullMargin) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    EmbeddingStore s = EmbeddingStore::create(2, 2, 2, rules, KgeBackend::Rotate,
                                              RuleVariant::Default, 1.0, 8.0);
    s.relation_theta(0)[0] = 0.4;
    s.relation_theta(0)[1] = -0.2;
    s.relation_theta(1)[0] = 0.4;
    s.relation_theta(1)[1] = -0.2;
    EXPECT_DOUBLE_EQ(rule_confidence(s, rules, 0), 8.0);
}

TEST(Confidence, MarginMinusDistance) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    EmbeddingStore s = EmbeddingStore::create(1, 2, 2, rules, KgeBackend::Rotate,
                                              RuleVariant::Default, 1.0, 8.0);
    s.relation_theta(0)[0] = 1.5;  // residual 1.5
    EXPECT_DOUBLE_EQ(rule_confidence(s, rules, 0), 6.5);
}

TEST(Confidence, UnknownRuleIdThrows) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    EmbeddingStore s = EmbeddingStore::create(1, 2, 2, rules, KgeBackend::Rotate,
                                              RuleVariant::Default, 1.0, 8.0);
    EXPECT_THROW(rule_confidence(s, rules, 5), std::out_of_range);
}

TEST(Confidence, FineGrainedComponents) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    EmbeddingStore s = EmbeddingStore::create(2, 2, 2, rules, KgeBackend::Rotate,
                                              RuleVariant::Default, 1.0, 8.0);
    s.relation_theta(0)[0] = 0.1;  // residuals {0.1, 0.3}
    s.relation_theta(0)[1] = 0.3;
    auto c = rule_confidence_vector(s, rules, 0, 1.0);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0], 3.9, 1e-12);
    EXPECT_NEAR(c[1], 3.7, 1e-12);
}

TEST(Confidence, PerfectlyConsistentRuleGivesUniformComponents) {
    RuleSet rules(std::vector<Rule>{Rule{1, {0}}});
    EmbeddingStore s = EmbeddingStore::create(4, 2, 2, rules, KgeBackend::Rotate,
                                              RuleVariant::Default, 1.0, 8.0);
    auto c = rule_confidence_vector(s, rules, 0, 1.0);
    for (double v : c) EXPECT_DOUBLE_EQ(v, 2.0);  // gamma_r / k
}

TEST(Confidence, FineGrainedSumsToScalarAtPOne) {
    RuleSet rules(std::vector<Rule>{Rule{2, {0, 1}}, Rule{0, {2, 1}}});
    EmbeddingStore s = EmbeddingStore::create(5, 2, 4, rules, KgeBackend::Rotate,
                                              RuleVariant::Default, 1.0, 3.0);
    Rng rng(31);
    s.init(rng);
    for (RuleId id = 0; id < 2; ++id) {
        auto c = rule_confidence_vector(s, rules, id, 1.0);
        double sum = std::accumulate(c.begin(), c.end(), 0.0);
        EXPECT_NEAR(sum, rule_confidence(s, rules, id, Norm::L1), 1e-6);
    }
}
