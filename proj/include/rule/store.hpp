#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rule/dataset.hpp"
#include "rule/geometry.hpp"
#include "rule/io.hpp"
#include "rule/random.hpp"
#include "rule/types.hpp"

namespace rule {

enum class KgeBackend : uint8_t { Rotate = 0, Transe = 1 };
enum class RuleVariant : uint8_t { Default = 0, Positional = 1 };

inline const char* to_string(KgeBackend b) {
    return b == KgeBackend::Rotate ? "rotate" : "transe";
}
inline const char* to_string(RuleVariant v) {
    return v == RuleVariant::Default ? "default" : "positional";
}

// Joint embedding state: entity complex vectors, relation angle vectors and
// rule angle vectors (one k-block per rule, or l blocks in the positional
// variant), all stored as flat double arrays.
class EmbeddingStore {
public:
    EmbeddingStore() = default;

    EmbeddingStore(size_t k, EntityId num_entities, RelationId num_relations,
                   const std::vector<size_t>& rule_lengths, KgeBackend backend,
                   RuleVariant variant, double gamma_t, double gamma_r)
        : k_(k),
          num_entities_(num_entities),
          num_relations_(num_relations),
          backend_(backend),
          variant_(variant),
          gamma_t_(gamma_t),
          gamma_r_(gamma_r),
          rule_lengths_(rule_lengths) {
        if (gamma_t <= 0 || gamma_r <= 0)
            throw std::invalid_argument("EmbeddingStore: margins must be positive");
        ent_re_.assign(static_cast<size_t>(num_entities) * k, 0.0);
        ent_im_.assign(static_cast<size_t>(num_entities) * k, 0.0);
        rel_theta_.assign(static_cast<size_t>(num_relations) * k, 0.0);
        rule_offsets_.reserve(rule_lengths.size() + 1);
        size_t off = 0;
        for (size_t len : rule_lengths) {
            rule_offsets_.push_back(off);
            off += (variant == RuleVariant::Positional ? len : 1) * k;
        }
        rule_offsets_.push_back(off);
        rule_theta_.assign(off, 0.0);
    }

    static EmbeddingStore create(size_t k, EntityId num_entities, RelationId num_relations,
                                 const RuleSet& rules, KgeBackend backend, RuleVariant variant,
                                 double gamma_t, double gamma_r) {
        std::vector<size_t> lens;
        lens.reserve(rules.size());
        for (const Rule& r : rules.rules()) lens.push_back(r.length());
        return EmbeddingStore(k, num_entities, num_relations, lens, backend, variant, gamma_t,
                              gamma_r);
    }

    // Entities uniform in [-gamma_t/k, gamma_t/k] per component; relation and
    // rule angles uniform in [-pi, pi).
    void init(Rng& rng) {
        double eps = gamma_t_ / static_cast<double>(k_);
        std::uniform_real_distribution<double> ent_dist(-eps, eps);
        std::uniform_real_distribution<double> angle_dist(-std::numbers::pi, std::numbers::pi);
        for (double& v : ent_re_) v = ent_dist(rng);
        for (double& v : ent_im_) v = ent_dist(rng);
        for (double& v : rel_theta_) v = angle_dist(rng);
        for (double& v : rule_theta_) v = angle_dist(rng);
    }

    size_t k() const { return k_; }
    EntityId num_entities() const { return num_entities_; }
    RelationId num_relations() const { return num_relations_; }
    size_t num_rules() const { return rule_lengths_.size(); }
    KgeBackend backend() const { return backend_; }
    RuleVariant variant() const { return variant_; }
    double gamma_t() const { return gamma_t_; }
    double gamma_r() const { return gamma_r_; }
    size_t rule_length(RuleId i) const { return rule_lengths_[static_cast<size_t>(i)]; }

    double* entity_re(EntityId e) { return ent_re_.data() + static_cast<size_t>(e) * k_; }
    double* entity_im(EntityId e) { return ent_im_.data() + static_cast<size_t>(e) * k_; }
    double* relation_theta(RelationId r) { return rel_theta_.data() + static_cast<size_t>(r) * k_; }
    double* rule_theta(RuleId i) { return rule_theta_.data() + rule_offsets_[static_cast<size_t>(i)]; }
    const double* entity_re(EntityId e) const { return ent_re_.data() + static_cast<size_t>(e) * k_; }
    const double* entity_im(EntityId e) const { return ent_im_.data() + static_cast<size_t>(e) * k_; }
    const double* relation_theta(RelationId r) const {
        return rel_theta_.data() + static_cast<size_t>(r) * k_;
    }
    const double* rule_theta(RuleId i) const {
        return rule_theta_.data() + rule_offsets_[static_cast<size_t>(i)];
    }
    // k for the default variant, body-length * k for positional
    size_t rule_block_size(RuleId i) const {
        return rule_offsets_[static_cast<size_t>(i) + 1] - rule_offsets_[static_cast<size_t>(i)];
    }

    std::vector<double>& entities_re() { return ent_re_; }
    std::vector<double>& entities_im() { return ent_im_; }
    std::vector<double>& relations_flat() { return rel_theta_; }
    std::vector<double>& rules_flat() { return rule_theta_; }
    const std::vector<double>& entities_re() const { return ent_re_; }
    const std::vector<double>& entities_im() const { return ent_im_; }
    const std::vector<double>& relations_flat() const { return rel_theta_; }
    const std::vector<double>& rules_flat() const { return rule_theta_; }
    const std::vector<size_t>& rule_offsets() const { return rule_offsets_; }

    size_t total_params() const {
        return ent_re_.size() + ent_im_.size() + rel_theta_.size() + rule_theta_.size();
    }

    ComplexVector entity(EntityId e) const {
        return ComplexVector(
            std::vector<double>(entity_re(e), entity_re(e) + k_),
            std::vector<double>(entity_im(e), entity_im(e) + k_));
    }
    AngleVector relation(RelationId r) const {
        return AngleVector(std::vector<double>(relation_theta(r), relation_theta(r) + k_));
    }

    // Angles only make sense modulo 2pi for the rotation backend; TransE
    // relation vectors are translations and are left alone.
    void canonicalize_angles() {
        if (backend_ != KgeBackend::Rotate) return;
        for (double& v : rel_theta_) v = wrap_angle(v);
        for (double& v : rule_theta_) v = wrap_angle(v);
    }

    Section to_section() const {
        BinaryWriter w;
        w.put<uint32_t>(static_cast<uint32_t>(k_));
        w.put<uint64_t>(static_cast<uint64_t>(num_entities_));
        w.put<uint32_t>(static_cast<uint32_t>(num_relations_));
        w.put<uint64_t>(rule_lengths_.size());
        w.put<uint8_t>(static_cast<uint8_t>(backend_));
        w.put<uint8_t>(static_cast<uint8_t>(variant_));
        w.put<float>(static_cast<float>(gamma_t_));
        w.put<float>(static_cast<float>(gamma_r_));
        for (size_t len : rule_lengths_) w.put<uint32_t>(static_cast<uint32_t>(len));
        w.put_f32_array(ent_re_.data(), ent_re_.size());
        w.put_f32_array(ent_im_.data(), ent_im_.size());
        w.put_f32_array(rel_theta_.data(), rel_theta_.size());
        w.put_f32_array(rule_theta_.data(), rule_theta_.size());
        return Section{kSectionEmbeddings, w.bytes()};
    }

    static EmbeddingStore from_section(const Section& s) {
        BinaryReader r(s.payload.data(), s.payload.size());
        auto k = r.get<uint32_t>();
        auto ne = r.get<uint64_t>();
        auto nr = r.get<uint32_t>();
        auto nl = r.get<uint64_t>();
        auto backend = static_cast<KgeBackend>(r.get<uint8_t>());
        auto variant = static_cast<RuleVariant>(r.get<uint8_t>());
        double gt = r.get<float>();
        double gr = r.get<float>();
        std::vector<size_t> lens(nl);
        for (auto& len : lens) len = r.get<uint32_t>();
        EmbeddingStore store(k, static_cast<EntityId>(ne), static_cast<RelationId>(nr), lens,
                             backend, variant, gt, gr);
        r.get_f32_array(store.ent_re_.data(), store.ent_re_.size());
        r.get_f32_array(store.ent_im_.data(), store.ent_im_.size());
        r.get_f32_array(store.rel_theta_.data(), store.rel_theta_.size());
        r.get_f32_array(store.rule_theta_.data(), store.rule_theta_.size());
        return store;
    }

private:
    size_t k_ = 0;
    EntityId num_entities_ = 0;
    RelationId num_relations_ = 0;
    KgeBackend backend_ = KgeBackend::Rotate;
    RuleVariant variant_ = RuleVariant::Default;
    double gamma_t_ = 1.0;
    double gamma_r_ = 1.0;
    std::vector<size_t> rule_lengths_;
    std::vector<size_t> rule_offsets_;  // size num_rules + 1
    std::vector<double> ent_re_, ent_im_, rel_theta_, rule_theta_;
};

// Distance of one triplet under the store's KGE backend.
inline double kge_distance(const EmbeddingStore& store, const Triplet& t, Norm norm) {
    size_t k = store.k();
    const double* hr = store.entity_re(t.head);
    const double* hi = store.entity_im(t.head);
    const double* th = store.relation_theta(t.rel);
    const double* tr = store.entity_re(t.tail);
    const double* ti = store.entity_im(t.tail);
    if (store.backend() == KgeBackend::Transe)
        return detail::transe_distance_kernel(hr, th, tr, k, norm);
    std::vector<double> c(k), s(k);
    for (size_t j = 0; j < k; ++j) {
        c[j] = std::cos(th[j]);
        s[j] = std::sin(th[j]);
    }
    return detail::rotate_distance_kernel(hr, hi, c.data(), s.data(), tr, ti, k, norm);
}

// KGE scores s_t = gamma_t - d(h, r, e) for every candidate tail e.
// The rotated head (or translated head for TransE) is computed once.
inline void kge_scores_for_query(const EmbeddingStore& store, EntityId head, RelationId rel,
                                 Norm norm, std::vector<double>& out) {
    size_t k = store.k();
    EntityId ne = store.num_entities();
    out.resize(static_cast<size_t>(ne));
    std::vector<double> qr(k), qi;
    const double* hr = store.entity_re(head);
    const double* th = store.relation_theta(rel);
    if (store.backend() == KgeBackend::Transe) {
        for (size_t j = 0; j < k; ++j) qr[j] = hr[j] + th[j];
        for (EntityId e = 0; e < ne; ++e) {
            const double* tr = store.entity_re(e);
            double acc = 0.0;
            for (size_t j = 0; j < k; ++j) {
                double x = qr[j] - tr[j];
                acc += norm == Norm::L1 ? std::fabs(x) : x * x;
            }
            out[static_cast<size_t>(e)] = store.gamma_t() - detail::finish_norm(acc, norm);
        }
        return;
    }
    qi.resize(k);
    const double* hi = store.entity_im(head);
    for (size_t j = 0; j < k; ++j) {
        double c = std::cos(th[j]), s = std::sin(th[j]);
        qr[j] = hr[j] * c - hi[j] * s;
        qi[j] = hr[j] * s + hi[j] * c;
    }
    for (EntityId e = 0; e < ne; ++e) {
        const double* tr = store.entity_re(e);
        const double* ti = store.entity_im(e);
        double acc = 0.0;
        for (size_t j = 0; j < k; ++j) {
            double x = qr[j] - tr[j];
            double y = qi[j] - ti[j];
            double m2 = x * x + y * y;
            acc += norm == Norm::L1 ? std::sqrt(m2) : m2;
        }
        out[static_cast<size_t>(e)] = store.gamma_t() - detail::finish_norm(acc, norm);
    }
}

// Chain residual for a stored rule, one dimension at a time. Wrapping
// applies to the rotation backend; TransE chains are plain translations.
inline void rule_residuals(const EmbeddingStore& store, const Rule& r, RuleId id,
                           std::vector<double>& out) {
    size_t k = store.k();
    out.resize(k);
    const double* rule = store.rule_theta(id);
    const double* head = store.relation_theta(r.head);
    bool periodic = store.backend() == KgeBackend::Rotate;
    bool positional = store.variant() == RuleVariant::Positional;
    for (size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (size_t i = 0; i < r.body.size(); ++i) {
            double b = store.relation_theta(r.body[i])[j];
            s += positional ? b * rule[i * k + j] : b;
        }
        if (!positional) s += rule[j];
        s -= head[j];
        out[j] = periodic ? wrap_angle(s) : s;
    }
}

inline double rule_distance_for_store(const EmbeddingStore& store, const Rule& r, RuleId id,
                                      Norm norm) {
    std::vector<double> res;
    rule_residuals(store, r, id, res);
    double acc = 0.0;
    for (double w : res) acc += norm == Norm::L1 ? std::fabs(w) : w * w;
    return detail::finish_norm(acc, norm);
}

}  // namespace rule
