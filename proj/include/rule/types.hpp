#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rule {

using EntityId = int32_t;
using RelationId = int32_t;
using RuleId = int32_t;

// Directed fact (h, r, t) with dense integer ids.
struct Triplet {
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;

    friend bool operator==(const Triplet&, const Triplet&) = default;
    friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

// Chain rule: body relations applied in order imply the head relation.
// `prior` is an optional miner score, carried through but unused by training.
struct Rule {
    RelationId head = 0;
    std::vector<RelationId> body;
    double prior = 0.0;
    bool has_prior = false;

    size_t length() const { return body.size(); }

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.head == b.head && a.body == b.body;
    }
};

// Inverse-relation id convention: involutive, O(1), no lookup table.
inline RelationId inv_relation(RelationId r, RelationId num_base_relations) {
    return static_cast<RelationId>((r + num_base_relations) % (2 * num_base_relations));
}

inline bool is_inverse_relation(RelationId r, RelationId num_base_relations) {
    return r >= num_base_relations;
}

struct TripletHash {
    size_t operator()(const Triplet& t) const {
        uint64_t x = (static_cast<uint64_t>(static_cast<uint32_t>(t.head)) << 40) ^
                     (static_cast<uint64_t>(static_cast<uint32_t>(t.rel)) << 20) ^
                     static_cast<uint64_t>(static_cast<uint32_t>(t.tail));
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return static_cast<size_t>(x);
    }
};

struct RuleHash {
    size_t operator()(const Rule& r) const {
        uint64_t x = 0xcbf29ce484222325ULL;
        auto mix = [&x](uint64_t v) {
            x ^= v;
            x *= 0x100000001b3ULL;
        };
        mix(static_cast<uint32_t>(r.head));
        for (RelationId b : r.body) mix(static_cast<uint32_t>(b));
        return static_cast<size_t>(x);
    }
};

}  // namespace rule
