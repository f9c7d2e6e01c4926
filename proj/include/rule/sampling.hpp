#pragma once

#include <vector>

#include "rule/dataset.hpp"
#include "rule/graph.hpp"
#include "rule/random.hpp"
#include "rule/types.hpp"

namespace rule {

constexpr int kNegativeResampleRetries = 32;

// Corrupts head or tail (50/50) with a uniformly random entity. Candidates
// that are existing facts are resampled a bounded number of times, then
// kept (a saturated neighborhood should not loop forever).
inline std::vector<Triplet> sample_negative_triplets(const Triplet& pos, const GraphIndex& graph,
                                                     size_t n, Rng& rng) {
    std::vector<Triplet> out;
    out.reserve(n);
    const size_t ne = static_cast<size_t>(graph.num_entities());
    for (size_t i = 0; i < n; ++i) {
        Triplet cand = pos;
        for (int attempt = 0; attempt < kNegativeResampleRetries; ++attempt) {
            bool corrupt_head = (rng() & 1) == 0;
            EntityId e = static_cast<EntityId>(uniform_index(rng, ne));
            cand = pos;
            if (corrupt_head)
                cand.head = e;
            else
                cand.tail = e;
            if (!graph.has(cand)) break;
        }
        out.push_back(cand);
    }
    return out;
}

// Replaces exactly one slot (uniform over body positions and the head) with
// a uniformly random different relation; corrupted rules already present in
// the rule set are resampled.
inline std::vector<Rule> sample_negative_rules(const Rule& pos, RelationId num_relations,
                                               const RuleSet& rules, size_t m, Rng& rng) {
    std::vector<Rule> out;
    out.reserve(m);
    const size_t slots = pos.body.size() + 1;
    for (size_t i = 0; i < m; ++i) {
        Rule cand = pos;
        for (int attempt = 0; attempt < kNegativeResampleRetries; ++attempt) {
            cand = pos;
            size_t slot = uniform_index(rng, slots);
            RelationId orig = slot == 0 ? pos.head : pos.body[slot - 1];
            RelationId repl = orig;
            while (repl == orig && num_relations > 1)
                repl = static_cast<RelationId>(uniform_index(rng, static_cast<size_t>(num_relations)));
            if (slot == 0)
                cand.head = repl;
            else
                cand.body[slot - 1] = repl;
            if (!rules.contains(cand)) break;
        }
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace rule
