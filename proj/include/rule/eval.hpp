#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rule/confidence.hpp"
#include "rule/ground_train.hpp"
#include "rule/grounding.hpp"
#include "rule/inference.hpp"
#include "rule/mlp.hpp"
#include "rule/ranking.hpp"
#include "rule/store.hpp"

namespace rule {

enum class ScoreSource : uint8_t { Emb = 0, Rule = 1, Both = 2 };

inline const char* to_string(ScoreSource s) {
    switch (s) {
        case ScoreSource::Emb: return "emb";
        case ScoreSource::Rule: return "rule";
        case ScoreSource::Both: return "both";
    }
    return "?";
}

struct EvalOptions {
    ScoreSource source = ScoreSource::Both;
    ScoreMode mode = ScoreMode::Normalized;
    double beta = 0.2;
    bool filtered = true;
    bool keep_ranks = false;
    Norm norm = Norm::L1;
    GroundingConfig grounding;  // agg / finegrained / p used at scoring time
};

// Everything needed to answer queries: the stage-1 store, the traversal
// graph (training facts), the rule set with its trained scorer, and the
// full known-triplet index used for filtered ranking.
struct ModelBundle {
    const EmbeddingStore* store = nullptr;
    const GroundingEngine* engine = nullptr;   // grounds over training facts
    const GroundingMlp* mlp = nullptr;
    const GraphIndex* known = nullptr;         // train + valid + test, augmented
    RelationId num_base_relations = 0;

    void require(ScoreSource source) const {
        if (!store) throw std::invalid_argument("evaluate: missing embedding store");
        if (!known) throw std::invalid_argument("evaluate: missing known-triplet index");
        if (source != ScoreSource::Emb) {
            if (!engine) throw std::invalid_argument("evaluate: missing grounding engine");
            if (!mlp) throw std::invalid_argument("evaluate: missing grounding model");
        }
    }
};

// Per-query detail hook for score dumps and oracle re-verification.
struct QueryOutcome {
    EntityId head;
    RelationId rel;
    EntityId gold;
    double rank;
    const std::vector<double>* scores;
    const std::vector<uint8_t>* mask;
};
using QueryCallback = std::function<void(const QueryOutcome&)>;

// Grounding scores for every entity; unreachable candidates share the
// zero-encoding score (MLP bias path, or 0 for sum/max).
inline void grounding_scores_for_query(const ModelBundle& bundle, EntityId head, RelationId rel,
                                       const EvalOptions& opts,
                                       const std::vector<double>& confidences,
                                       const std::vector<double>* conf_matrix,
                                       std::vector<double>& out) {
    const EmbeddingStore& store = *bundle.store;
    SupportTable table = bundle.engine->ground(head, rel);
    double zero_score = 0.0;
    if (opts.grounding.agg == GroundingAgg::Mlp || opts.grounding.agg == GroundingAgg::Hard)
        zero_score = bundle.mlp->zero_input_score();
    out.assign(static_cast<size_t>(store.num_entities()), zero_score);
    for (const auto& [e, row] : table.rows)
        out[static_cast<size_t>(e)] = grounding_score(*bundle.mlp, row, confidences,
                                                      opts.grounding, store.k(), conf_matrix);
}

// Two queries per test triplet, (h, r, ?) and (t, r^-1, ?); filtered mode
// masks every other known true answer.
inline EvalReport evaluate(const ModelBundle& bundle, const std::vector<Triplet>& test_base,
                           const EvalOptions& opts, QueryCallback on_query = {}) {
    bundle.require(opts.source);
    const EmbeddingStore& store = *bundle.store;

    std::vector<double> confidences;
    std::vector<double> conf_matrix;
    const std::vector<double>* conf_matrix_ptr = nullptr;
    if (opts.source != ScoreSource::Emb) {
        confidences = all_rule_confidences(store, bundle.engine->rules(), opts.norm);
        if (opts.grounding.finegrained) {
            conf_matrix = all_rule_confidence_vectors(store, bundle.engine->rules(),
                                                      opts.grounding.p);
            conf_matrix_ptr = &conf_matrix;
        }
    }

    EvalReport report;
    std::vector<double> kge, ground, final_scores;
    std::vector<uint8_t> mask(static_cast<size_t>(store.num_entities()));

    auto run_query = [&](EntityId h, RelationId r, EntityId gold) {
        std::fill(mask.begin(), mask.end(), 0);
        if (opts.filtered) {
            for (EntityId t : bundle.known->neighbors(h, r)) mask[static_cast<size_t>(t)] = 1;
            mask[static_cast<size_t>(gold)] = 0;
        }
        const std::vector<double>* scores = nullptr;
        if (opts.source == ScoreSource::Emb) {
            kge_scores_for_query(store, h, r, opts.norm, kge);
            scores = &kge;
        } else if (opts.source == ScoreSource::Rule) {
            grounding_scores_for_query(bundle, h, r, opts, confidences, conf_matrix_ptr, ground);
            scores = &ground;
        } else {
            kge_scores_for_query(store, h, r, opts.norm, kge);
            grounding_scores_for_query(bundle, h, r, opts, confidences, conf_matrix_ptr, ground);
            final_scores = integrated_score(kge, ground, opts.beta, opts.mode,
                                            opts.filtered ? &mask : nullptr);
            scores = &final_scores;
        }
        double rank = expected_rank(*scores, static_cast<size_t>(gold),
                                    opts.filtered ? &mask : nullptr);
        report.add_rank(rank, opts.keep_ranks);
        if (on_query)
            on_query(QueryOutcome{h, r, gold, rank, scores, opts.filtered ? &mask : nullptr});
    };

    for (const Triplet& t : test_base) {
        run_query(t.head, t.rel, t.tail);
        run_query(t.tail, inv_relation(t.rel, bundle.num_base_relations), t.head);
    }
    report.finalize();
    return report;
}

}  // namespace rule
