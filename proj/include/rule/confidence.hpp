#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rule/dataset.hpp"
#include "rule/store.hpp"

namespace rule {

// Scalar rule confidence w_i = gamma_r - d_r(rule).
inline double rule_confidence(const EmbeddingStore& store, const RuleSet& rules, RuleId id,
                              Norm norm = Norm::L1) {
    if (id < 0 || static_cast<size_t>(id) >= rules.size())
        throw std::out_of_range("rule_confidence: unknown rule id");
    return store.gamma_r() - rule_distance_for_store(store, rules[id], id, norm);
}

inline std::vector<double> all_rule_confidences(const EmbeddingStore& store, const RuleSet& rules,
                                                Norm norm = Norm::L1) {
    std::vector<double> out(rules.size());
    for (size_t i = 0; i < rules.size(); ++i)
        out[i] = rule_confidence(store, rules, static_cast<RuleId>(i), norm);
    return out;
}

// Fine-grained confidence vector: c_i[j] = gamma_r/k - |wrap(residual_j)|^p,
// one entry per embedding dimension. With p = 1 the components sum to the
// scalar confidence under the L1 rule distance.
inline std::vector<double> rule_confidence_vector(const EmbeddingStore& store,
                                                  const RuleSet& rules, RuleId id, double p) {
    if (id < 0 || static_cast<size_t>(id) >= rules.size())
        throw std::out_of_range("rule_confidence_vector: unknown rule id");
    std::vector<double> res;
    rule_residuals(store, rules[id], id, res);
    double base = store.gamma_r() / static_cast<double>(store.k());
    std::vector<double> out(res.size());
    for (size_t j = 0; j < res.size(); ++j) out[j] = base - std::pow(std::fabs(res[j]), p);
    return out;
}

// Row-major |L| x k matrix of fine-grained confidences.
inline std::vector<double> all_rule_confidence_vectors(const EmbeddingStore& store,
                                                       const RuleSet& rules, double p) {
    std::vector<double> out;
    out.reserve(rules.size() * store.k());
    for (size_t i = 0; i < rules.size(); ++i) {
        auto c = rule_confidence_vector(store, rules, static_cast<RuleId>(i), p);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

}  // namespace rule
