#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rule/confidence.hpp"
#include "rule/grounding.hpp"
#include "rule/mlp.hpp"
#include "rule/random.hpp"
#include "rule/store.hpp"

namespace rule {

enum class GroundingAgg : uint8_t { Mlp = 0, Sum = 1, Max = 2, Hard = 3 };

inline const char* to_string(GroundingAgg a) {
    switch (a) {
        case GroundingAgg::Mlp: return "mlp";
        case GroundingAgg::Sum: return "sum";
        case GroundingAgg::Max: return "max";
        case GroundingAgg::Hard: return "hard";
    }
    return "?";
}

struct GroundingConfig {
    double lr = 1e-4;
    size_t batch = 16;     // queries per optimizer step
    size_t epochs = 10;
    size_t hidden = 256;
    GroundingAgg agg = GroundingAgg::Mlp;   // Mlp and Hard are trainable
    bool finegrained = false;
    double p = 1.0;        // fine-grained exponent, usually the norm order
    uint64_t seed = 0;
};

// Grounds every training query once (support tables are constant given the
// graph and rules) and keeps the per-candidate rows for MLP training.
struct GroundedQuery {
    EntityId gold;
    std::vector<EntityId> candidates;                                // gold first
    std::vector<std::vector<std::pair<RuleId, int32_t>>> rows;       // per candidate
};

inline std::vector<GroundedQuery> ground_training_queries(const GroundingEngine& engine,
                                                          const std::vector<Triplet>& train_aug,
                                                          RelationId num_base_relations) {
    std::vector<GroundedQuery> out;
    out.reserve(train_aug.size());
    for (const Triplet& t : train_aug) {
        // the query edge and its inverse must not leak into the traversal
        EdgeExclusions excl{t, Triplet{t.tail, inv_relation(t.rel, num_base_relations), t.head}};
        SupportTable table = engine.ground(t.head, t.rel, excl);
        GroundedQuery q;
        q.gold = t.tail;
        q.candidates.push_back(t.tail);
        auto it = table.rows.find(t.tail);
        q.rows.push_back(it != table.rows.end() ? it->second
                                                : std::vector<std::pair<RuleId, int32_t>>{});
        std::vector<EntityId> others;
        for (const auto& [e, row] : table.rows)
            if (e != t.tail) others.push_back(e);
        std::sort(others.begin(), others.end());
        for (EntityId e : others) {
            q.candidates.push_back(e);
            q.rows.push_back(table.rows.at(e));
        }
        out.push_back(std::move(q));
    }
    return out;
}

namespace detail {

inline SparseEncoding make_encoding(const std::vector<std::pair<RuleId, int32_t>>& row,
                                    const std::vector<double>& confidences, GroundingAgg agg) {
    return agg == GroundingAgg::Hard ? encode_hard_multihot(row)
                                     : encode_soft_multihot(row, confidences);
}

}  // namespace detail

// Candidate score under the configured aggregation. For fine-grained mode
// the shared MLP is averaged over the k per-dimension encodings.
inline double grounding_score(const GroundingMlp& mlp,
                              const std::vector<std::pair<RuleId, int32_t>>& row,
                              const std::vector<double>& confidences,
                              const GroundingConfig& cfg, size_t k,
                              const std::vector<double>* conf_matrix) {
    switch (cfg.agg) {
        case GroundingAgg::Sum: return aggregate_sum(row, confidences);
        case GroundingAgg::Max: return aggregate_max(row, confidences);
        default: break;
    }
    if (cfg.finegrained && cfg.agg == GroundingAgg::Mlp) {
        double s = 0.0;
        for (size_t j = 0; j < k; ++j)
            s += mlp.forward(encode_soft_multihot_fg(row, *conf_matrix, k, j));
        return s / static_cast<double>(k);
    }
    return mlp.forward(detail::make_encoding(row, confidences, cfg.agg));
}

// Trains the grounding MLP by softmax cross-entropy over each query's
// candidate set (gold answer always included). Deterministic given the
// seed. Sum/Max modes have no parameters and return an untrained MLP.
inline GroundingMlp train_grounding(const GroundingEngine& engine,
                                    const EmbeddingStore& store,
                                    const std::vector<Triplet>& train_aug,
                                    RelationId num_base_relations, const GroundingConfig& cfg,
                                    Norm norm = Norm::L1,
                                    std::vector<double>* nll_trace = nullptr) {
    const RuleSet& rules = engine.rules();
    Rng rng(mix_seed(cfg.seed, 11));
    GroundingMlp mlp(rules.size(), cfg.hidden, rng);
    if (cfg.agg == GroundingAgg::Sum || cfg.agg == GroundingAgg::Max) return mlp;

    std::vector<double> confidences = all_rule_confidences(store, rules, norm);
    std::vector<double> conf_matrix;
    size_t k = store.k();
    if (cfg.finegrained) conf_matrix = all_rule_confidence_vectors(store, rules, cfg.p);

    std::vector<GroundedQuery> queries =
        ground_training_queries(engine, train_aug, num_base_relations);

    // queries with no reachable alternative carry no gradient
    std::vector<size_t> usable;
    for (size_t i = 0; i < queries.size(); ++i)
        if (queries[i].candidates.size() > 1) usable.push_back(i);
    if (usable.empty()) return mlp;

    EpochSampler order(usable.size(), mix_seed(cfg.seed, 12));
    GroundingMlp::Grad grad;
    std::vector<double> adam_m, adam_v;
    uint64_t t = 0;

    size_t steps_per_epoch = (usable.size() + cfg.batch - 1) / cfg.batch;
    std::vector<double> hidden_pre;
    std::vector<std::vector<double>> hidden_cache;
    std::vector<SparseEncoding> enc_cache;
    std::vector<double> scores;

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double nll_sum = 0.0;
        size_t nll_n = 0;
        for (size_t s = 0; s < steps_per_epoch; ++s) {
            grad.reset(mlp);
            size_t in_batch = 0;
            for (size_t b = 0; b < cfg.batch; ++b) {
                const GroundedQuery& q = queries[usable[order.next()]];
                size_t nc = q.candidates.size();
                scores.resize(nc);

                if (cfg.finegrained && cfg.agg == GroundingAgg::Mlp) {
                    // forward/backward averaged over k per-dimension encodings
                    std::fill(scores.begin(), scores.end(), 0.0);
                    for (size_t c = 0; c < nc; ++c)
                        for (size_t j = 0; j < k; ++j)
                            scores[c] +=
                                mlp.forward(encode_soft_multihot_fg(q.rows[c], conf_matrix, k, j));
                    for (double& v : scores) v /= static_cast<double>(k);
                } else {
                    enc_cache.resize(nc);
                    hidden_cache.resize(nc);
                    for (size_t c = 0; c < nc; ++c) {
                        enc_cache[c] = detail::make_encoding(q.rows[c], confidences, cfg.agg);
                        scores[c] = mlp.forward(enc_cache[c], &hidden_cache[c]);
                    }
                }

                double mx = *std::max_element(scores.begin(), scores.end());
                double z = 0.0;
                for (double v : scores) z += std::exp(v - mx);
                double log_z = std::log(z) + mx;
                nll_sum += log_z - scores[0];  // gold is candidate 0
                ++nll_n;

                for (size_t c = 0; c < nc; ++c) {
                    double p = std::exp(scores[c] - mx) / z;
                    double dscore = p - (c == 0 ? 1.0 : 0.0);
                    if (cfg.finegrained && cfg.agg == GroundingAgg::Mlp) {
                        double dk = dscore / static_cast<double>(k);
                        for (size_t j = 0; j < k; ++j) {
                            SparseEncoding enc =
                                encode_soft_multihot_fg(q.rows[c], conf_matrix, k, j);
                            mlp.forward(enc, &hidden_pre);
                            mlp.backward(enc, hidden_pre, dk, grad);
                        }
                    } else {
                        mlp.backward(enc_cache[c], hidden_cache[c], dscore, grad);
                    }
                }
                ++in_batch;
            }
            if (in_batch == 0) continue;
            double scale = 1.0 / static_cast<double>(in_batch);
            for (double& g : grad.w1) g *= scale;
            for (double& g : grad.b1) g *= scale;
            for (double& g : grad.w2) g *= scale;
            grad.b2 *= scale;
            mlp.adam_step(grad, cfg.lr, ++t, adam_m, adam_v);
        }
        double epoch_nll = nll_n ? nll_sum / static_cast<double>(nll_n) : 0.0;
        if (!std::isfinite(epoch_nll))
            throw std::runtime_error("train_grounding: non-finite NLL at epoch " +
                                     std::to_string(epoch));
        if (nll_trace) nll_trace->push_back(epoch_nll);
    }
    return mlp;
}

}  // namespace rule
