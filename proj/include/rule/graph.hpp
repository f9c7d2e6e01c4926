#pragma once

#include <algorithm>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rule/types.hpp"

namespace rule {

// Immutable adjacency index over a triplet set. Lookup (h, r) returns the
// sorted tails; membership tests are O(1). Safe for concurrent reads once
// built.
class GraphIndex {
public:
    GraphIndex() = default;

    GraphIndex(std::vector<Triplet> triplets, EntityId num_entities, RelationId num_relations)
        : num_entities_(num_entities), num_relations_(num_relations) {
        for (const Triplet& t : triplets) {
            if (membership_.insert(t).second) triplets_.push_back(t);
        }
        for (const Triplet& t : triplets_) adjacency_[key(t.head, t.rel)].push_back(t.tail);
        for (auto& [k, tails] : adjacency_) std::sort(tails.begin(), tails.end());
    }

    const std::vector<EntityId>& neighbors(EntityId h, RelationId r) const {
        auto it = adjacency_.find(key(h, r));
        return it == adjacency_.end() ? empty_ : it->second;
    }

    bool has(EntityId h, RelationId r, EntityId t) const {
        return membership_.count(Triplet{h, r, t}) > 0;
    }
    bool has(const Triplet& t) const { return membership_.count(t) > 0; }

    const std::vector<Triplet>& triplets() const { return triplets_; }
    EntityId num_entities() const { return num_entities_; }
    RelationId num_relations() const { return num_relations_; }
    size_t size() const { return triplets_.size(); }

private:
    static uint64_t key(EntityId h, RelationId r) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(h)) << 32) |
               static_cast<uint32_t>(r);
    }

    EntityId num_entities_ = 0;
    RelationId num_relations_ = 0;
    std::vector<Triplet> triplets_;
    std::unordered_set<Triplet, TripletHash> membership_;
    std::unordered_map<uint64_t, std::vector<EntityId>> adjacency_;
    std::vector<EntityId> empty_;
};

inline GraphIndex build_index(std::vector<Triplet> triplets, EntityId num_entities,
                              RelationId num_relations) {
    return GraphIndex(std::move(triplets), num_entities, num_relations);
}

}  // namespace rule
