#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rule/loss.hpp"
#include "rule/store.hpp"

namespace rule {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Dense Adam over the embedding store. Rows whose moments are still
// identically zero and that received no gradient are skipped: the update
// there is exactly zero, so this is an optimization, not an approximation
// (and it keeps untouched rule embeddings bit-identical, e.g. at alpha=0).
class AdamState {
public:
    AdamState() = default;

    explicit AdamState(const EmbeddingStore& store, AdamConfig cfg = {}) : cfg_(cfg) {
        m_ent_re_.assign(store.entities_re().size(), 0.0);
        v_ent_re_.assign(store.entities_re().size(), 0.0);
        m_ent_im_.assign(store.entities_im().size(), 0.0);
        v_ent_im_.assign(store.entities_im().size(), 0.0);
        m_rel_.assign(store.relations_flat().size(), 0.0);
        v_rel_.assign(store.relations_flat().size(), 0.0);
        m_rule_.assign(store.rules_flat().size(), 0.0);
        v_rule_.assign(store.rules_flat().size(), 0.0);
        ent_active_.assign(static_cast<size_t>(store.num_entities()), 0);
        rule_active_.assign(store.num_rules(), 0);
    }

    // One optimizer step from the accumulated batch gradient. lambda_coeff,
    // when nonzero, adds lambda_coeff * param to every entity gradient
    // (the derivative of the mean-squared-magnitude regularizer).
    void step(EmbeddingStore& store, const GradBuffer& grad, double lambda_coeff = 0.0) {
        ++t_;
        bias1_ = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        bias2_ = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

        const size_t k = store.k();
        update_span(store.relations_flat().data(), grad.rel.data(), m_rel_.data(),
                    v_rel_.data(), grad.rel.size());

        if (lambda_coeff != 0.0)
            for (auto& f : ent_active_) f = 1;
        for (const auto& [e, g] : grad.ent) ent_active_[static_cast<size_t>(e)] = 1;
        std::vector<double> zero;
        for (size_t e = 0; e < ent_active_.size(); ++e) {
            if (!ent_active_[e]) continue;
            auto it = grad.ent.find(static_cast<EntityId>(e));
            const double* g = nullptr;
            if (it != grad.ent.end()) g = it->second.data();
            size_t off = e * k;
            update_entity_row(store.entities_re().data() + off, g, m_ent_re_.data() + off,
                              v_ent_re_.data() + off, k, lambda_coeff);
            update_entity_row(store.entities_im().data() + off, g ? g + k : nullptr,
                              m_ent_im_.data() + off, v_ent_im_.data() + off, k, lambda_coeff);
        }

        for (const auto& [id, g] : grad.rule_blocks) rule_active_[static_cast<size_t>(id)] = 1;
        for (size_t i = 0; i < rule_active_.size(); ++i) {
            if (!rule_active_[i]) continue;
            size_t off = store.rule_offsets()[i];
            size_t n = store.rule_offsets()[i + 1] - off;
            auto it = grad.rule_blocks.find(static_cast<RuleId>(i));
            const double* g = it != grad.rule_blocks.end() ? it->second.data() : nullptr;
            update_span_opt(store.rules_flat().data() + off, g, m_rule_.data() + off,
                            v_rule_.data() + off, n);
        }
    }

    uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

    Section to_section(const EmbeddingStore& store, const std::string& rng_bundle) const {
        BinaryWriter w;
        w.put<uint64_t>(t_);
        w.put<double>(cfg_.lr);
        w.put<double>(cfg_.beta1);
        w.put<double>(cfg_.beta2);
        w.put<double>(cfg_.eps);
        auto put = [&w](const std::vector<double>& a) {
            w.put<uint64_t>(a.size());
            w.put_f64_array(a.data(), a.size());
        };
        // exact f64 parameters; the EMBS section is only f32
        put(store.entities_re());
        put(store.entities_im());
        put(store.relations_flat());
        put(store.rules_flat());
        put(m_ent_re_);
        put(v_ent_re_);
        put(m_ent_im_);
        put(v_ent_im_);
        put(m_rel_);
        put(v_rel_);
        put(m_rule_);
        put(v_rule_);
        w.put<uint64_t>(ent_active_.size());
        for (uint8_t f : ent_active_) w.put<uint8_t>(f);
        w.put<uint64_t>(rule_active_.size());
        for (uint8_t f : rule_active_) w.put<uint8_t>(f);
        w.put_string(rng_bundle);
        return Section{kSectionOptimizerState, w.bytes()};
    }

    // Restores exact parameters into `store` and the optimizer moments;
    // returns the serialized RNG bundle.
    std::string from_section(const Section& s, EmbeddingStore& store) {
        BinaryReader r(s.payload.data(), s.payload.size());
        t_ = r.get<uint64_t>();
        cfg_.lr = r.get<double>();
        cfg_.beta1 = r.get<double>();
        cfg_.beta2 = r.get<double>();
        cfg_.eps = r.get<double>();
        auto get = [&r](std::vector<double>& a) {
            uint64_t n = r.get<uint64_t>();
            a.resize(n);
            r.get_f64_array(a.data(), n);
        };
        get(store.entities_re());
        get(store.entities_im());
        get(store.relations_flat());
        get(store.rules_flat());
        get(m_ent_re_);
        get(v_ent_re_);
        get(m_ent_im_);
        get(v_ent_im_);
        get(m_rel_);
        get(v_rel_);
        get(m_rule_);
        get(v_rule_);
        ent_active_.resize(r.get<uint64_t>());
        for (auto& f : ent_active_) f = r.get<uint8_t>();
        rule_active_.resize(r.get<uint64_t>());
        for (auto& f : rule_active_) f = r.get<uint8_t>();
        return r.get_string();
    }

private:
    void update_one(double& p, double g, double& m, double& v) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
        double mhat = m / bias1_;
        double vhat = v / bias2_;
        p -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }

    void update_span(double* p, const double* g, double* m, double* v, size_t n) {
        for (size_t i = 0; i < n; ++i) update_one(p[i], g[i], m[i], v[i]);
    }

    void update_span_opt(double* p, const double* g, double* m, double* v, size_t n) {
        for (size_t i = 0; i < n; ++i) update_one(p[i], g ? g[i] : 0.0, m[i], v[i]);
    }

    void update_entity_row(double* p, const double* g, double* m, double* v, size_t n,
                           double lambda_coeff) {
        for (size_t i = 0; i < n; ++i) {
            double gi = (g ? g[i] : 0.0) + lambda_coeff * p[i];
            update_one(p[i], gi, m[i], v[i]);
        }
    }

    AdamConfig cfg_;
    uint64_t t_ = 0;
    double bias1_ = 1.0, bias2_ = 1.0;
    std::vector<double> m_ent_re_, v_ent_re_, m_ent_im_, v_ent_im_;
    std::vector<double> m_rel_, v_rel_, m_rule_, v_rule_;
    std::vector<uint8_t> ent_active_, rule_active_;
};

}  // namespace rule
