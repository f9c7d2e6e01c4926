#pragma once

#include <cmath>
#include <cstring>
#include <unordered_map>
#include <vector>

#include "rule/store.hpp"
#include "rule/types.hpp"

namespace rule {

// log sigma(x), stable on both tails.
inline double log_sigmoid(double x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Accumulates parameter gradients for one batch. Relations are dense (the
// relation table is small); entity and rule blocks are sparse since a batch
// touches few of them.
struct GradBuffer {
    std::vector<double> rel;                                      // nR * k
    std::unordered_map<EntityId, std::vector<double>> ent;        // re | im halves, 2k each
    std::unordered_map<RuleId, std::vector<double>> rule_blocks;  // block size per rule
    size_t k = 0;

    void reset(const EmbeddingStore& store) {
        k = store.k();
        rel.assign(store.relations_flat().size(), 0.0);
        ent.clear();
        rule_blocks.clear();
    }

    double* entity_grad(EntityId e) {
        auto [it, fresh] = ent.try_emplace(e);
        if (fresh) it->second.assign(2 * k, 0.0);
        return it->second.data();
    }

    double* relation_grad(RelationId r) { return rel.data() + static_cast<size_t>(r) * k; }

    double* rule_grad(RuleId id, size_t block_size) {
        auto [it, fresh] = rule_blocks.try_emplace(id);
        if (fresh) it->second.assign(block_size, 0.0);
        return it->second.data();
    }

    // other's contributions are added after everything already in *this;
    // with per-thread buffers merged in thread order the floating-point
    // reduction order is fixed.
    void merge(const GradBuffer& other) {
        for (size_t i = 0; i < rel.size(); ++i) rel[i] += other.rel[i];
        for (const auto& [e, g] : other.ent) {
            double* dst = entity_grad(e);
            for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
        for (const auto& [id, g] : other.rule_blocks) {
            double* dst = rule_grad(id, g.size());
            for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
    }
};

namespace detail {

// d/dx of the norm accumulated over per-dimension residuals:
// L1 -> sign(x); L2 -> x / d.
inline double norm_backprop(double x, double distance, Norm norm) {
    if (norm == Norm::L1) return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    return distance > 1e-12 ? x / distance : 0.0;
}

struct TripletScratch {
    std::vector<double> cos_t, sin_t;  // relation rotation
    std::vector<double> u, v;          // rotated positive head
    std::vector<double> neg_dist;
    std::vector<double> neg_weight;
};

// Distance of (h', r, t') given the cached rotation; either side may be the
// positive one.
inline double rotate_dist_with_rotation(const EmbeddingStore& store, const TripletScratch& ws,
                                        EntityId head, EntityId tail, Norm norm) {
    size_t k = store.k();
    const double* hr = store.entity_re(head);
    const double* hi = store.entity_im(head);
    const double* tr = store.entity_re(tail);
    const double* ti = store.entity_im(tail);
    double acc = 0.0;
    for (size_t j = 0; j < k; ++j) {
        double u = hr[j] * ws.cos_t[j] - hi[j] * ws.sin_t[j];
        double v = hr[j] * ws.sin_t[j] + hi[j] * ws.cos_t[j];
        double x = u - tr[j];
        double y = v - ti[j];
        double m2 = x * x + y * y;
        acc += norm == Norm::L1 ? std::sqrt(m2) : m2;
    }
    return finish_norm(acc, norm);
}

// Accumulates coeff * d d(h,r,t) / d params for the rotation backend.
inline void rotate_dist_backprop(const EmbeddingStore& store, const TripletScratch& ws,
                                 EntityId head, EntityId tail, RelationId rel, Norm norm,
                                 double distance, double coeff, GradBuffer& grad) {
    size_t k = store.k();
    const double* hr = store.entity_re(head);
    const double* hi = store.entity_im(head);
    const double* tr = store.entity_re(tail);
    const double* ti = store.entity_im(tail);
    double* gh = grad.entity_grad(head);
    double* gt = grad.entity_grad(tail);
    double* gr = grad.relation_grad(rel);
    for (size_t j = 0; j < k; ++j) {
        double c = ws.cos_t[j], s = ws.sin_t[j];
        double u = hr[j] * c - hi[j] * s;
        double v = hr[j] * s + hi[j] * c;
        double x = u - tr[j];
        double y = v - ti[j];
        double gx, gy;
        if (norm == Norm::L1) {
            double m = std::sqrt(x * x + y * y);
            if (m < 1e-12) continue;
            gx = coeff * x / m;
            gy = coeff * y / m;
        } else {
            if (distance < 1e-12) continue;
            gx = coeff * x / distance;
            gy = coeff * y / distance;
        }
        gh[j] += gx * c + gy * s;
        gh[k + j] += -gx * s + gy * c;
        gr[j] += gx * (-v) + gy * u;
        gt[j] -= gx;
        gt[k + j] -= gy;
    }
}

inline double transe_dist(const EmbeddingStore& store, EntityId head, RelationId rel,
                          EntityId tail, Norm norm) {
    return transe_distance_kernel(store.entity_re(head), store.relation_theta(rel),
                                  store.entity_re(tail), store.k(), norm);
}

inline void transe_dist_backprop(const EmbeddingStore& store, EntityId head, EntityId tail,
                                 RelationId rel, Norm norm, double distance, double coeff,
                                 GradBuffer& grad) {
    size_t k = store.k();
    const double* hr = store.entity_re(head);
    const double* th = store.relation_theta(rel);
    const double* tr = store.entity_re(tail);
    double* gh = grad.entity_grad(head);
    double* gt = grad.entity_grad(tail);
    double* gr = grad.relation_grad(rel);
    for (size_t j = 0; j < k; ++j) {
        double x = hr[j] + th[j] - tr[j];
        double g = coeff * norm_backprop(x, distance, norm);
        gh[j] += g;
        gr[j] += g;
        gt[j] -= g;
    }
}

}  // namespace detail

// Self-adversarial triplet loss:
//   L = -log sig(gamma_t - d(h,r,t)) - sum_i p_i log sig(d(h'_i,r,t'_i) - gamma_t)
// with p_i = softmax_i(adv * (gamma_t - d_i)), treated as constants for the
// gradient. Gradients are scaled by grad_scale and accumulated into *grad
// when given; pass nullptr for a loss-only evaluation.
inline double triplet_loss(const EmbeddingStore& store, const Triplet& pos,
                           const std::vector<Triplet>& negatives, double adv, Norm norm,
                           GradBuffer* grad = nullptr, double grad_scale = 1.0) {
    if (negatives.empty()) throw std::invalid_argument("triplet_loss: no negatives");
    const double gamma = store.gamma_t();
    const size_t k = store.k();
    const bool rotate = store.backend() == KgeBackend::Rotate;

    detail::TripletScratch ws;
    if (rotate) {
        ws.cos_t.resize(k);
        ws.sin_t.resize(k);
        const double* th = store.relation_theta(pos.rel);
        for (size_t j = 0; j < k; ++j) {
            ws.cos_t[j] = std::cos(th[j]);
            ws.sin_t[j] = std::sin(th[j]);
        }
    }
    auto dist = [&](EntityId h, EntityId t) {
        return rotate ? detail::rotate_dist_with_rotation(store, ws, h, t, norm)
                      : detail::transe_dist(store, h, pos.rel, t, norm);
    };

    double d_pos = dist(pos.head, pos.tail);

    ws.neg_dist.resize(negatives.size());
    for (size_t i = 0; i < negatives.size(); ++i)
        ws.neg_dist[i] = dist(negatives[i].head, negatives[i].tail);

    // softmax over adv * (gamma - d_i), computed stably
    ws.neg_weight.resize(negatives.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (double d : ws.neg_dist) mx = std::max(mx, adv * (gamma - d));
    double z = 0.0;
    for (size_t i = 0; i < negatives.size(); ++i) {
        ws.neg_weight[i] = std::exp(adv * (gamma - ws.neg_dist[i]) - mx);
        z += ws.neg_weight[i];
    }
    for (double& w : ws.neg_weight) w /= z;

    double loss = -log_sigmoid(gamma - d_pos);
    for (size_t i = 0; i < negatives.size(); ++i)
        loss -= ws.neg_weight[i] * log_sigmoid(ws.neg_dist[i] - gamma);

    if (grad) {
        double coeff_pos = grad_scale * sigmoid(d_pos - gamma);
        if (rotate)
            detail::rotate_dist_backprop(store, ws, pos.head, pos.tail, pos.rel, norm, d_pos,
                                         coeff_pos, *grad);
        else
            detail::transe_dist_backprop(store, pos.head, pos.tail, pos.rel, norm, d_pos,
                                         coeff_pos, *grad);
        for (size_t i = 0; i < negatives.size(); ++i) {
            double coeff = -grad_scale * ws.neg_weight[i] * sigmoid(gamma - ws.neg_dist[i]);
            if (rotate)
                detail::rotate_dist_backprop(store, ws, negatives[i].head, negatives[i].tail,
                                             pos.rel, norm, ws.neg_dist[i], coeff, *grad);
            else
                detail::transe_dist_backprop(store, negatives[i].head, negatives[i].tail, pos.rel,
                                             norm, ws.neg_dist[i], coeff, *grad);
        }
    }
    return loss;
}

// Rule loss with uniformly weighted negatives:
//   L = -log sig(gamma_r - d_r) - (1/|M|) sum log sig(d'_i - gamma_r).
// Negative rules keep the positive rule's embedding block; only relation
// slots differ.
inline double rule_loss(const EmbeddingStore& store, const Rule& pos, RuleId rule_id,
                        const std::vector<Rule>& negatives, Norm norm, GradBuffer* grad = nullptr,
                        double grad_scale = 1.0) {
    if (negatives.empty()) throw std::invalid_argument("rule_loss: no negatives");
    const double gamma = store.gamma_r();
    const size_t k = store.k();
    const bool positional = store.variant() == RuleVariant::Positional;
    const size_t block = store.rule_block_size(rule_id);

    std::vector<double> res;
    auto chain = [&](const Rule& r) {
        rule_residuals(store, r, rule_id, res);
        double acc = 0.0;
        for (double w : res) acc += norm == Norm::L1 ? std::fabs(w) : w * w;
        return detail::finish_norm(acc, norm);
    };
    auto backprop = [&](const Rule& r, double distance, double coeff) {
        rule_residuals(store, r, rule_id, res);
        double* grule = grad->rule_grad(rule_id, block);
        double* ghead = grad->relation_grad(r.head);
        const double* rule = store.rule_theta(rule_id);
        for (size_t j = 0; j < k; ++j) {
            double g = coeff * detail::norm_backprop(res[j], distance, norm);
            if (g == 0.0) continue;
            for (size_t i = 0; i < r.body.size(); ++i) {
                if (positional) {
                    grad->relation_grad(r.body[i])[j] += g * rule[i * k + j];
                    grule[i * k + j] += g * store.relation_theta(r.body[i])[j];
                } else {
                    grad->relation_grad(r.body[i])[j] += g;
                }
            }
            if (!positional) grule[j] += g;
            ghead[j] -= g;
        }
    };

    double d_pos = chain(pos);
    double loss = -log_sigmoid(gamma - d_pos);
    std::vector<double> neg_dist(negatives.size());
    const double inv_m = 1.0 / static_cast<double>(negatives.size());
    for (size_t i = 0; i < negatives.size(); ++i) {
        neg_dist[i] = chain(negatives[i]);
        loss -= inv_m * log_sigmoid(neg_dist[i] - gamma);
    }

    if (grad) {
        backprop(pos, d_pos, grad_scale * sigmoid(d_pos - gamma));
        for (size_t i = 0; i < negatives.size(); ++i)
            backprop(negatives[i], neg_dist[i],
                     -grad_scale * inv_m * sigmoid(gamma - neg_dist[i]));
    }
    return loss;
}

}  // namespace rule
