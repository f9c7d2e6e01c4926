#pragma once

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rule/random.hpp"
#include "rule/types.hpp"

namespace rule {

// Rule-inferrability indicator: the fraction of edges that sit on short
// undirected cycles. Every stored triplet counts as one edge; parallel
// edges between a pair all qualify for 2-cycles together.
struct CycleReport {
    double proportion_2cycle = 0.0;
    double proportion_3cycle = 0.0;
    double proportion_le3cycle = 0.0;
    size_t total_edges = 0;
    size_t edges_in_2cycle = 0;
    size_t edges_in_3cycle = 0;
    size_t edges_in_le3cycle = 0;
};

// Operates on base (pre-augmentation) triplets treated as undirected edges.
// An edge (h,t) is in a 2-membered cycle iff a second stored triplet joins
// the same unordered pair, and in a 3-membered cycle iff some third entity
// is adjacent to both endpoints. Self-loops count as edges but never
// qualify.
inline CycleReport cycle_edge_proportion(const std::vector<Triplet>& base_triplets,
                                         EntityId num_entities) {
    if (base_triplets.empty()) throw std::invalid_argument("cycle_edge_proportion: empty graph");

    auto pair_key = [](EntityId a, EntityId b) {
        if (a > b) std::swap(a, b);
        return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
               static_cast<uint32_t>(b);
    };
    std::unordered_map<uint64_t, int> pair_count;
    std::vector<std::vector<EntityId>> nbrs(static_cast<size_t>(num_entities));
    for (const Triplet& t : base_triplets) {
        if (t.head == t.tail) continue;
        ++pair_count[pair_key(t.head, t.tail)];
        nbrs[static_cast<size_t>(t.head)].push_back(t.tail);
        nbrs[static_cast<size_t>(t.tail)].push_back(t.head);
    }
    for (auto& v : nbrs) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    auto have_common_neighbor = [&](EntityId h, EntityId t) {
        const auto& a = nbrs[static_cast<size_t>(h)];
        const auto& b = nbrs[static_cast<size_t>(t)];
        size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] == b[j]) {
                if (a[i] != h && a[i] != t) return true;
                ++i;
                ++j;
            } else if (a[i] < b[j]) {
                ++i;
            } else {
                ++j;
            }
        }
        return false;
    };

    CycleReport r;
    r.total_edges = base_triplets.size();
    for (const Triplet& t : base_triplets) {
        if (t.head == t.tail) continue;
        bool in2 = pair_count[pair_key(t.head, t.tail)] >= 2;
        bool in3 = have_common_neighbor(t.head, t.tail);
        r.edges_in_2cycle += in2;
        r.edges_in_3cycle += in3;
        r.edges_in_le3cycle += (in2 || in3);
    }
    double n = static_cast<double>(r.total_edges);
    r.proportion_2cycle = static_cast<double>(r.edges_in_2cycle) / n;
    r.proportion_3cycle = static_cast<double>(r.edges_in_3cycle) / n;
    r.proportion_le3cycle = static_cast<double>(r.edges_in_le3cycle) / n;
    return r;
}

// Corruption simulation: replaces pct% of the triplets (uniformly chosen)
// with uniformly random (h, r, t) samples and reports the indicator again.
inline std::vector<Triplet> corrupt_triplets(const std::vector<Triplet>& base, double pct,
                                             EntityId num_entities, RelationId num_relations,
                                             Rng& rng) {
    if (pct < 0.0 || pct > 100.0)
        throw std::invalid_argument("corrupt_triplets: pct must be in [0, 100]");
    std::vector<Triplet> out = base;
    size_t n_corrupt = static_cast<size_t>(pct / 100.0 * static_cast<double>(base.size()));
    std::vector<size_t> idx(base.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t i = 0; i < n_corrupt; ++i) {
        Triplet t;
        t.head = static_cast<EntityId>(uniform_index(rng, static_cast<size_t>(num_entities)));
        t.rel = static_cast<RelationId>(uniform_index(rng, static_cast<size_t>(num_relations)));
        t.tail = static_cast<EntityId>(uniform_index(rng, static_cast<size_t>(num_entities)));
        out[idx[i]] = t;
    }
    return out;
}

}  // namespace rule
