#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rule/dataset.hpp"
#include "rule/graph.hpp"
#include "rule/types.hpp"

namespace rule {

// Edges removed during a traversal (leakage guard for training queries).
class EdgeExclusions {
public:
    EdgeExclusions() = default;
    EdgeExclusions(std::initializer_list<Triplet> edges) : set_(edges) {}

    void add(const Triplet& t) { set_.insert(t); }
    bool contains(EntityId h, RelationId r, EntityId t) const {
        return !set_.empty() && set_.count(Triplet{h, r, t}) > 0;
    }
    bool empty() const { return set_.empty(); }

private:
    std::unordered_set<Triplet, TripletHash> set_;
};

// Per-query grounding result: for each reachable candidate tail, the rules
// that reach it and their walk counts. Absent entries mean zero support.
struct SupportTable {
    std::unordered_map<EntityId, std::vector<std::pair<RuleId, int32_t>>> rows;

    int32_t support(EntityId e, RuleId r) const {
        auto it = rows.find(e);
        if (it == rows.end()) return 0;
        for (const auto& [id, c] : it->second)
            if (id == r) return c;
        return 0;
    }

    bool empty() const { return rows.empty(); }
};

namespace detail {

// Prefix trie over rule bodies sharing one head relation; walking it
// grounds every rule for a query in a single pass.
struct RuleTrie {
    struct Node {
        std::vector<std::pair<RelationId, int32_t>> children;  // (relation, node index)
        std::vector<RuleId> terminal;
    };
    std::vector<Node> nodes;

    RuleTrie() { nodes.emplace_back(); }

    void insert(const std::vector<RelationId>& body, RuleId id) {
        int32_t at = 0;
        for (RelationId r : body) {
            int32_t next = -1;
            for (auto& [rel, child] : nodes[static_cast<size_t>(at)].children)
                if (rel == r) {
                    next = child;
                    break;
                }
            if (next < 0) {
                next = static_cast<int32_t>(nodes.size());
                nodes[static_cast<size_t>(at)].children.emplace_back(r, next);
                nodes.emplace_back();
            }
            at = next;
        }
        nodes[static_cast<size_t>(at)].terminal.push_back(id);
    }
};

}  // namespace detail

constexpr int64_t kSupportCap = std::numeric_limits<int32_t>::max();

// Grounds all rules whose head relation matches the query by walking their
// shared body-prefix trie with a frontier of (entity -> walk count).
// Walks may revisit entities; counts equal exhaustive walk enumeration.
class GroundingEngine {
public:
    GroundingEngine(const GraphIndex& graph, const RuleSet& rules)
        : graph_(graph), rules_(rules) {
        tries_.resize(static_cast<size_t>(graph.num_relations()));
        for (size_t i = 0; i < rules.size(); ++i) {
            const Rule& r = rules[static_cast<RuleId>(i)];
            auto& trie = tries_[static_cast<size_t>(r.head)];
            if (!trie) trie = std::make_unique<detail::RuleTrie>();
            trie->insert(r.body, static_cast<RuleId>(i));
        }
    }

    SupportTable ground(EntityId head, RelationId query_rel,
                        const EdgeExclusions& exclusions = {}) const {
        SupportTable table;
        const auto& trie = tries_[static_cast<size_t>(query_rel)];
        if (!trie) return table;
        Frontier start;
        start.emplace_back(head, 1);
        walk(*trie, 0, start, exclusions, table);
        return table;
    }

    const RuleSet& rules() const { return rules_; }
    const GraphIndex& graph() const { return graph_; }

private:
    using Frontier = std::vector<std::pair<EntityId, int64_t>>;  // sorted by entity

    void walk(const detail::RuleTrie& trie, int32_t node, const Frontier& frontier,
              const EdgeExclusions& excl, SupportTable& table) const {
        const auto& n = trie.nodes[static_cast<size_t>(node)];
        for (RuleId id : n.terminal)
            for (const auto& [e, c] : frontier)
                table.rows[e].emplace_back(id,
                                           static_cast<int32_t>(std::min(c, kSupportCap)));
        for (const auto& [rel, child] : n.children) {
            std::unordered_map<EntityId, int64_t> next;
            for (const auto& [e, c] : frontier) {
                for (EntityId t : graph_.neighbors(e, rel)) {
                    if (excl.contains(e, rel, t)) continue;
                    next[t] += c;
                }
            }
            if (next.empty()) continue;
            Frontier nf(next.begin(), next.end());
            std::sort(nf.begin(), nf.end());
            walk(trie, child, nf, excl, table);
        }
    }

    const GraphIndex& graph_;
    const RuleSet& rules_;
    std::vector<std::unique_ptr<detail::RuleTrie>> tries_;
};

// One-shot grounding of a query against a rule set.
inline SupportTable ground_query(const GraphIndex& graph, EntityId head, RelationId query_rel,
                                 const RuleSet& rules, const EdgeExclusions& exclusions = {}) {
    GroundingEngine engine(graph, rules);
    return engine.ground(head, query_rel, exclusions);
}

// Sparse soft multi-hot encoding: v_i = w_i * support_i for activated rules,
// entries ordered by rule id.
using SparseEncoding = std::vector<std::pair<RuleId, double>>;

inline SparseEncoding encode_soft_multihot(const std::vector<std::pair<RuleId, int32_t>>& row,
                                           const std::vector<double>& confidences) {
    SparseEncoding v;
    v.reserve(row.size());
    for (const auto& [id, count] : row)
        v.emplace_back(id, confidences[static_cast<size_t>(id)] * count);
    std::sort(v.begin(), v.end());
    return v;
}

// Hard variant: confidence replaced by 1, entries are the raw counts.
inline SparseEncoding encode_hard_multihot(const std::vector<std::pair<RuleId, int32_t>>& row) {
    SparseEncoding v;
    v.reserve(row.size());
    for (const auto& [id, count] : row) v.emplace_back(id, static_cast<double>(count));
    std::sort(v.begin(), v.end());
    return v;
}

// Fine-grained encoding j (of k): v_j[i] = c_i[j] * support_i, with
// conf_matrix laid out |L| x k row-major.
inline SparseEncoding encode_soft_multihot_fg(const std::vector<std::pair<RuleId, int32_t>>& row,
                                              const std::vector<double>& conf_matrix, size_t k,
                                              size_t j) {
    SparseEncoding v;
    v.reserve(row.size());
    for (const auto& [id, count] : row)
        v.emplace_back(id, conf_matrix[static_cast<size_t>(id) * k + j] * count);
    std::sort(v.begin(), v.end());
    return v;
}

// MLP-free ablation aggregators over one support row.
inline double aggregate_sum(const std::vector<std::pair<RuleId, int32_t>>& row,
                            const std::vector<double>& confidences) {
    double s = 0.0;
    for (const auto& [id, count] : row) s += confidences[static_cast<size_t>(id)] * count;
    return s;
}

inline double aggregate_max(const std::vector<std::pair<RuleId, int32_t>>& row,
                            const std::vector<double>& confidences) {
    double best = 0.0;
    bool any = false;
    for (const auto& [id, count] : row) {
        double w = confidences[static_cast<size_t>(id)];
        if (!any || w > best) best = w;
        any = true;
    }
    return any ? best : 0.0;
}

}  // namespace rule
