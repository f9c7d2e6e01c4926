#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rule/dataset.hpp"
#include "rule/graph.hpp"
#include "rule/types.hpp"

namespace rule {

struct MinerConfig {
    int max_len = 3;
    int64_t min_support = 1;
    int top_k_per_head = 100;
};

namespace detail {

// Relation sequences of length <= 5 packed into a u64, 12 bits per slot,
// slot value = relation id + 1 so 0 marks "empty".
inline uint64_t extend_seq(uint64_t seq, RelationId r, int depth) {
    return seq | (static_cast<uint64_t>(static_cast<uint32_t>(r) + 1) << (12 * depth));
}

inline std::vector<RelationId> decode_seq(uint64_t seq) {
    std::vector<RelationId> out;
    while (seq) {
        out.push_back(static_cast<RelationId>((seq & 0xfff) - 1));
        seq >>= 12;
    }
    return out;
}

}  // namespace detail

// Plumbing-grade candidate miner: enumerates closed chain rules by walking
// every relation sequence up to max_len from every entity, counting
//   body walks  = all walks following the sequence, and
//   support     = walks whose endpoints are also joined by a head edge.
// Rules pass min_support, are ranked per head relation by the
// support / body-walk ratio, and at most top_k_per_head survive.
// The identity rule body == [head] is skipped.
inline RuleSet mine_candidate_rules(const GraphIndex& graph, const MinerConfig& cfg = {}) {
    if (cfg.max_len > 5) throw std::invalid_argument("mine_candidate_rules: max_len > 5");

    // head edges grouped by (start, end) pair for closing walks
    std::unordered_map<uint64_t, std::vector<RelationId>> pair_edges;
    auto pair_key = [](EntityId a, EntityId b) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
               static_cast<uint32_t>(b);
    };
    for (const Triplet& t : graph.triplets()) pair_edges[pair_key(t.head, t.tail)].push_back(t.rel);

    std::unordered_map<uint64_t, int64_t> body_walks;           // seq -> walk count
    std::unordered_map<uint64_t, int64_t> support;              // seq*4096+head -> count
    const RelationId nr = graph.num_relations();

    // depth-first walk enumeration from each entity
    struct Frame {
        EntityId at;
        uint64_t seq;
        int depth;
    };
    std::vector<Frame> stack;
    for (EntityId start = 0; start < graph.num_entities(); ++start) {
        stack.push_back({start, 0, 0});
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            if (f.depth > 0) {
                ++body_walks[f.seq];
                auto pe = pair_edges.find(pair_key(start, f.at));
                if (pe != pair_edges.end()) {
                    for (RelationId head : pe->second)
                        ++support[f.seq * 4096 + static_cast<uint32_t>(head)];
                }
            }
            if (f.depth == cfg.max_len) continue;
            for (RelationId r = 0; r < nr; ++r) {
                const auto& tails = graph.neighbors(f.at, r);
                if (tails.empty()) continue;
                uint64_t seq = detail::extend_seq(f.seq, r, f.depth);
                for (EntityId t : tails) stack.push_back({t, seq, f.depth + 1});
            }
        }
    }

    struct Candidate {
        Rule rule;
        int64_t sup;
        double ratio;
    };
    std::unordered_map<RelationId, std::vector<Candidate>> per_head;
    for (const auto& [key, sup] : support) {
        if (sup < cfg.min_support) continue;
        uint64_t seq = key / 4096;
        RelationId head = static_cast<RelationId>(key % 4096);
        std::vector<RelationId> body = detail::decode_seq(seq);
        if (body.size() == 1 && body[0] == head) continue;
        double ratio = static_cast<double>(sup) / static_cast<double>(body_walks.at(seq));
        Rule r;
        r.head = head;
        r.body = std::move(body);
        r.prior = ratio;
        r.has_prior = true;
        per_head[head].push_back({std::move(r), sup, ratio});
    }

    std::vector<Rule> out;
    std::vector<RelationId> heads;
    for (const auto& [h, _] : per_head) heads.push_back(h);
    std::sort(heads.begin(), heads.end());
    for (RelationId h : heads) {
        auto& cands = per_head[h];
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.ratio != b.ratio) return a.ratio > b.ratio;
            if (a.sup != b.sup) return a.sup > b.sup;
            return a.rule.body < b.rule.body;
        });
        size_t keep = std::min<size_t>(cands.size(), static_cast<size_t>(cfg.top_k_per_head));
        for (size_t i = 0; i < keep; ++i) out.push_back(std::move(cands[i].rule));
    }
    return RuleSet(std::move(out));
}

}  // namespace rule
