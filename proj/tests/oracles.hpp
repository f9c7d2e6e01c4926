#pragma once

// Independent brute-force oracles shared by the unit tests and the
// acceptance suite. These deliberately avoid the library's traversal and
// ranking code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "rule/graph.hpp"
#include "rule/types.hpp"

namespace oracle {

// Number of walks from `start` to `end` following exactly the body
// relation sequence, by plain recursive enumeration (entity revisits
// allowed).
inline int64_t count_walks(const rule::GraphIndex& g, rule::EntityId at,
                           const std::vector<rule::RelationId>& body, size_t depth,
                           rule::EntityId end,
                           const std::vector<rule::Triplet>& excluded = {}) {
    if (depth == body.size()) return at == end ? 1 : 0;
    int64_t total = 0;
    for (rule::EntityId next : g.neighbors(at, body[depth])) {
        bool skip = false;
        for (const rule::Triplet& e : excluded)
            if (e.head == at && e.rel == body[depth] && e.tail == next) skip = true;
        if (!skip) total += count_walks(g, next, body, depth + 1, end, excluded);
    }
    return total;
}

// All terminal entities of body walks from `start`, with walk counts.
inline std::map<rule::EntityId, int64_t> walk_terminals(
    const rule::GraphIndex& g, rule::EntityId start, const std::vector<rule::RelationId>& body,
    const std::vector<rule::Triplet>& excluded = {}) {
    std::map<rule::EntityId, int64_t> out;
    for (rule::EntityId e = 0; e < g.num_entities(); ++e) {
        int64_t c = count_walks(g, start, body, 0, e, excluded);
        if (c > 0) out[e] = c;
    }
    return out;
}

// Rule support by brute force over all substitutions: sum over head edges
// (x, head, y) of the number of body walks x -> y.
inline int64_t rule_support(const rule::GraphIndex& g, const rule::Rule& r) {
    int64_t total = 0;
    for (const rule::Triplet& t : g.triplets())
        if (t.rel == r.head) total += count_walks(g, t.head, r.body, 0, t.tail);
    return total;
}

// Monte-Carlo expected rank over random shuffles of tied scores; returns
// (mean, standard error of the mean).
inline std::pair<double, double> shuffled_rank(const std::vector<double>& scores,
                                               size_t true_index,
                                               const std::vector<uint8_t>* mask, int n_shuffles,
                                               uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<size_t> order;
    for (size_t i = 0; i < scores.size(); ++i)
        if (!mask || !(*mask)[i] || i == true_index) order.push_back(i);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < n_shuffles; ++s) {
        std::shuffle(order.begin(), order.end(), rng);
        // stable sort by descending score leaves tied entries in shuffled order
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return scores[a] > scores[b]; });
        double rank = 0.0;
        for (size_t i = 0; i < order.size(); ++i)
            if (order[i] == true_index) rank = static_cast<double>(i + 1);
        sum += rank;
        sumsq += rank * rank;
    }
    double n = static_cast<double>(n_shuffles);
    double mean = sum / n;
    double var = std::max(0.0, sumsq / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

// Uniform random multigraph without duplicate triplets.
inline std::vector<rule::Triplet> random_graph(int n_entities, int n_relations, int n_edges,
                                               uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> ent(0, n_entities - 1), rel(0, n_relations - 1);
    std::vector<rule::Triplet> out;
    std::set<std::tuple<int, int, int>> seen;
    int guard = 0;
    while (static_cast<int>(out.size()) < n_edges && guard++ < n_edges * 50) {
        rule::Triplet t{ent(rng), rel(rng), ent(rng)};
        if (seen.insert({t.head, t.rel, t.tail}).second) out.push_back(t);
    }
    return out;
}

}  // namespace oracle
