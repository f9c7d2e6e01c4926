#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "rule/trainer.hpp"

using namespace rule;

namespace {

TrainConfig tiny_config(uint64_t seed) {
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.gamma_t = 2.0;
    cfg.gamma_r = 1.5;
    cfg.alpha = 1.0;
    cfg.lr = 1e-2;
    cfg.adv = 0.5;
    cfg.neg_triplets = 4;
    cfg.neg_rules = 4;
    cfg.batch_triplets = 8;
    cfg.batch_rules = 4;
    cfg.steps = 50;
    cfg.seed = seed;
    return cfg;
}

GraphIndex toy_graph() {
    auto aug = augment_inverses({{0, 0, 1}, {1, 1, 2}, {0, 2, 2}, {2, 0, 3}, {3, 1, 4}}, 3);
    return GraphIndex(aug, 5, 6);
}

RuleSet toy_rules() {
    return RuleSet(std::vector<Rule>{Rule{2, {0, 1}}, Rule{5, {4, 3}}});
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    return true;
}

}  // namespace

TEST(JointTrainer, DeterministicReplay) {
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();
    JointTrainer a(g, rules, tiny_config(42));
    JointTrainer b(g, rules, tiny_config(42));
    for (int i = 0; i < 30; ++i) {
        a.step();
        b.step();
    }
    EXPECT_TRUE(same_bits(a.store().entities_re(), b.store().entities_re()));
    EXPECT_TRUE(same_bits(a.store().entities_im(), b.store().entities_im()));
    EXPECT_TRUE(same_bits(a.store().relations_flat(), b.store().relations_flat()));
    EXPECT_TRUE(same_bits(a.store().rules_flat(), b.store().rules_flat()));
}

TEST(JointTrainer, DifferentSeedsDiverge) {
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();
    JointTrainer a(g, rules, tiny_config(1));
    JointTrainer b(g, rules, tiny_config(2));
    a.step();
    b.step();
    EXPECT_FALSE(same_bits(a.store().entities_re(), b.store().entities_re()));
}

TEST(JointTrainer, ZeroStepsEqualsInitialization) {
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();
    TrainConfig cfg = tiny_config(7);
    cfg.steps = 0;
    JointTrainer t(g, rules, cfg);
    t.train(nullptr, 3, nullptr);
    EmbeddingStore fresh = EmbeddingStore::create(cfg.dim, 5, 6, rules, cfg.kge_backend,
                                                  cfg.rule_variant, cfg.gamma_t, cfg.gamma_r);
    Rng rng(mix_seed(cfg.seed, 0));
    fresh.init(rng);
    EXPECT_TRUE(same_bits(t.store().entities_re(), fresh.entities_re()));
    EXPECT_TRUE(same_bits(t.store().rules_flat(), fresh.rules_flat()));
}

TEST(JointTrainer, AlphaZeroLeavesRuleEmbeddingsUntouched) {
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();
    TrainConfig cfg = tiny_config(9);
    cfg.alpha = 0.0;
    JointTrainer t(g, rules, cfg);
    std::vector<double> init_rules = t.store().rules_flat();
    for (int i = 0; i < 25; ++i) t.step();
    EXPECT_TRUE(same_bits(t.store().rules_flat(), init_rules));
}

TEST(JointTrainer, AlphaZeroMatchesPureKgeRun) {
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();
    TrainConfig cfg = tiny_config(11);
    cfg.alpha = 0.0;
    JointTrainer with_rules(g, rules, cfg);
    JointTrainer without_rules(g, RuleSet{}, cfg);
    for (int i = 0; i < 25; ++i) {
        with_rules.step();
        without_rules.step();
    }
    EXPECT_TRUE(same_bits(with_rules.store().relations_flat(),
                          without_rules.store().relations_flat()));
    EXPECT_TRUE(
        same_bits(with_rules.store().entities_re(), without_rules.store().entities_re()));
}

TEST(JointTrainer, TripletLossDecreasesOnToyGraph) {
    GraphIndex g = toy_graph();
    TrainConfig cfg = tiny_config(13);
    cfg.steps = 200;
    cfg.alpha = 0.0;
    JointTrainer t(g, RuleSet{}, cfg);
    t.train(nullptr, 3, nullptr);
    const auto& trace = t.triplet_loss_trace();
    ASSERT_EQ(trace.size(), 200u);
    auto avg = [&](size_t from, size_t to) {
        return std::accumulate(trace.begin() + from, trace.begin() + to, 0.0) /
               static_cast<double>(to - from);
    };
    double start = avg(0, 50), mid = avg(75, 125), end = avg(150, 200);
    EXPECT_LT(mid, start);
    EXPECT_LT(end, mid);
}

TEST(JointTrainer, LambdaRegularizerShrinksEntityNorms) {
    GraphIndex g = toy_graph();
    TrainConfig cfg = tiny_config(15);
    cfg.steps = 100;
    cfg.alpha = 0.0;
    auto sqnorm = [](const EmbeddingStore& s) {
        double t = 0.0;
        for (double v : s.entities_re()) t += v * v;
        for (double v : s.entities_im()) t += v * v;
        return t;
    };
    JointTrainer plain(g, RuleSet{}, cfg);
    cfg.lambda = 50.0;  // exaggerated to make the effect unambiguous
    JointTrainer reg(g, RuleSet{}, cfg);
    for (int i = 0; i < 100; ++i) {
        plain.step();
        reg.step();
    }
    EXPECT_LT(sqnorm(reg.store()), sqnorm(plain.store()));
    EXPECT_GT(reg.last_losses().regularizer, 0.0);
}

TEST(JointTrainer, NonFiniteLossAbortsWithDiagnostic) {
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();
    JointTrainer t(g, rules, tiny_config(17));
    t.store().entity_re(0)[0] = std::numeric_limits<double>::quiet_NaN();
    try {
        for (int i = 0; i < 5; ++i) t.step();
        FAIL() << "expected abort";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

TEST(JointTrainer, CheckpointResumeReplaysExactly) {
    namespace fs = std::filesystem;
    std::string path = (fs::temp_directory_path() / "rule_resume_test.bin").string();
    GraphIndex g = toy_graph();
    RuleSet rules = toy_rules();

    JointTrainer full(g, rules, tiny_config(21));
    for (int i = 0; i < 30; ++i) full.step();

    JointTrainer half(g, rules, tiny_config(21));
    for (int i = 0; i < 15; ++i) half.step();
    half.save_checkpoint(path);

    JointTrainer resumed(g, rules, tiny_config(21));
    resumed.resume_from(path);
    EXPECT_EQ(resumed.steps_done(), 15u);
    for (int i = 0; i < 15; ++i) resumed.step();

    EXPECT_TRUE(same_bits(resumed.store().entities_re(), full.store().entities_re()));
    EXPECT_TRUE(same_bits(resumed.store().entities_im(), full.store().entities_im()));
    EXPECT_TRUE(same_bits(resumed.store().relations_flat(), full.store().relations_flat()));
    EXPECT_TRUE(same_bits(resumed.store().rules_flat(), full.store().rules_flat()));
    fs::remove(path);
}

TEST(JointTrainer, SymmetryRuleTransfersToHeldOutInverses) {
    // pairs joined by a symmetric relation; only some reverse edges are in
    // the training data, the rest must be inferred via the symmetry rule
    const EntityId n = 16;
    std::vector<Triplet> base;
    for (EntityId i = 0; i + 1 < n; i += 2) base.push_back({i, 0, static_cast<EntityId>(i + 1)});
    for (EntityId i = 0; i + 1 < 10; i += 2) base.push_back({static_cast<EntityId>(i + 1), 0, i});
    auto aug = augment_inverses(base, 1);
    GraphIndex g(aug, n, 2);
    RuleSet rules(std::vector<Rule>{Rule{0, {1}}, Rule{1, {0}}});  // r0(y,x) -> r0(x,y)

    TrainConfig cfg = tiny_config(23);
    cfg.dim = 16;
    cfg.steps = 400;
    cfg.alpha = 2.0;
    cfg.lr = 5e-3;
    JointTrainer t(g, rules, cfg);
    t.train(nullptr, 1, nullptr);
    const EmbeddingStore& s = t.store();

    // held-out reversed facts for pairs 10..15
    std::vector<double> held;
    for (EntityId i = 10; i + 1 < n; i += 2)
        held.push_back(kge_distance(s, {static_cast<EntityId>(i + 1), 0, i}, Norm::L1));
    std::vector<double> random_pairs;
    Rng rng(5);
    for (int rep = 0; rep < 400; ++rep) {
        EntityId a = static_cast<EntityId>(uniform_index(rng, n));
        EntityId b = static_cast<EntityId>(uniform_index(rng, n));
        if (g.has(a, 0, b)) continue;
        bool is_held = false;
        for (EntityId i = 10; i + 1 < n; i += 2)
            if (a == i + 1 && b == i) is_held = true;
        if (!is_held) random_pairs.push_back(kge_distance(s, {a, 0, b}, Norm::L1));
    }
    std::sort(random_pairs.begin(), random_pairs.end());
    // "above the 90th percentile of scores" = below the 10th percentile of distances
    double q10 = random_pairs[random_pairs.size() / 10];
    for (double d : held) EXPECT_LT(d, q10);
}
