#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rule/adam.hpp"
#include "rule/graph.hpp"
#include "rule/loss.hpp"
#include "rule/ranking.hpp"
#include "rule/sampling.hpp"
#include "rule/store.hpp"

namespace rule {

struct TrainConfig {
    size_t dim = 500;
    double gamma_t = 6.0;
    double gamma_r = 8.0;
    double alpha = 1.0;       // rule-loss weight in the joint objective
    double lr = 1e-4;
    double adv = 0.25;        // self-adversarial temperature
    double lambda = 0.0;      // entity regularization, 0 = off
    size_t neg_triplets = 256;
    size_t neg_rules = 64;
    size_t batch_triplets = 256;
    size_t batch_rules = 256;
    size_t steps = 1000;
    uint64_t seed = 0;
    KgeBackend kge_backend = KgeBackend::Rotate;
    RuleVariant rule_variant = RuleVariant::Default;
    Norm norm = Norm::L1;
    size_t eval_every = 0;   // validation interval in steps, 0 = off
    size_t save_every = 0;   // resumable checkpoint interval, 0 = only at end
    size_t patience = 0;     // evals without improvement before stopping, 0 = off
    int threads = 1;

    void validate() const {
        if (batch_triplets < 1 || neg_triplets < 1 || neg_rules < 1 || batch_rules < 1)
            throw std::invalid_argument("TrainConfig: counts must be >= 1");
        if (lr <= 0) throw std::invalid_argument("TrainConfig: lr must be positive");
        if (adv < 0) throw std::invalid_argument("TrainConfig: adv must be nonnegative");
    }
};

struct StepLosses {
    double triplet = 0.0;
    double rule = 0.0;
    double regularizer = 0.0;
    double total() const { return triplet + rule + regularizer; }
};

// Stage-1 optimizer: alternates one triplet batch and one rule batch per
// step, minimizing mean L_t + alpha * mean L_r (+ optional entity
// regularizer) with Adam. Sampling uses separate RNG streams for triplets
// and rules, so disabling the rule path does not shift triplet draws.
class JointTrainer {
public:
    JointTrainer(const GraphIndex& graph, const RuleSet& rules, TrainConfig cfg)
        : graph_(graph),
          rules_(rules),
          cfg_(cfg),
          store_(EmbeddingStore::create(cfg.dim, graph.num_entities(), graph.num_relations(),
                                        rules, cfg.kge_backend, cfg.rule_variant, cfg.gamma_t,
                                        cfg.gamma_r)),
          rng_triplet_(mix_seed(cfg.seed, 1)),
          rng_rule_(mix_seed(cfg.seed, 2)),
          triplet_sampler_(graph.size(), mix_seed(cfg.seed, 3)),
          adam_(store_, AdamConfig{cfg.lr}) {
        cfg_.validate();
        Rng rng_init(mix_seed(cfg.seed, 0));
        store_.init(rng_init);
        if (use_rules()) rule_sampler_ = EpochSampler(rules.size(), mix_seed(cfg.seed, 4));
        grads_.resize(static_cast<size_t>(std::max(1, cfg_.threads)));
    }

    bool use_rules() const { return cfg_.alpha != 0.0 && !rules_.empty(); }

    EmbeddingStore& store() { return store_; }
    const EmbeddingStore& store() const { return store_; }
    const TrainConfig& config() const { return cfg_; }
    uint64_t steps_done() const { return step_; }

    // One optimizer update on freshly drawn batches.
    StepLosses step() {
        std::vector<size_t> tbatch;
        triplet_sampler_.fill(tbatch, cfg_.batch_triplets);
        std::vector<std::vector<Triplet>> tneg(tbatch.size());
        for (size_t i = 0; i < tbatch.size(); ++i)
            tneg[i] = sample_negative_triplets(graph_.triplets()[tbatch[i]], graph_,
                                               cfg_.neg_triplets, rng_triplet_);

        std::vector<size_t> rbatch;
        std::vector<std::vector<Rule>> rneg;
        if (use_rules()) {
            rule_sampler_->fill(rbatch, cfg_.batch_rules);
            rneg.resize(rbatch.size());
            for (size_t i = 0; i < rbatch.size(); ++i)
                rneg[i] = sample_negative_rules(rules_[static_cast<RuleId>(rbatch[i])],
                                                graph_.num_relations(), rules_, cfg_.neg_rules,
                                                rng_rule_);
        }
        return apply_batches(tbatch, tneg, rbatch, rneg);
    }

    // Full loop with optional validation-based early stopping. on_eval is
    // called with (step, validation KGE MRR) whenever validation runs.
    using EvalCallback = std::function<void(uint64_t, double)>;
    using CheckpointCallback = std::function<void(uint64_t, bool /*is_best*/)>;

    void train(const std::vector<Triplet>* valid_base, RelationId num_base_relations,
               const GraphIndex* known_for_filtering, EvalCallback on_eval = {},
               CheckpointCallback on_checkpoint = {}) {
        size_t evals_since_best = 0;
        for (uint64_t s = step_; s < cfg_.steps; ++s) {
            StepLosses losses = step();
            ++step_;
            last_losses_ = losses;
            loss_trace_.push_back(losses.triplet);
            if (cfg_.eval_every && valid_base && step_ % cfg_.eval_every == 0) {
                double mrr = kge_validation_mrr(*valid_base, num_base_relations,
                                                known_for_filtering);
                if (on_eval) on_eval(step_, mrr);
                bool best = mrr > best_valid_mrr_;
                if (best) {
                    best_valid_mrr_ = mrr;
                    evals_since_best = 0;
                } else {
                    ++evals_since_best;
                }
                if (on_checkpoint) on_checkpoint(step_, best);
                if (cfg_.patience && evals_since_best >= cfg_.patience) break;
            } else if (cfg_.save_every && step_ % cfg_.save_every == 0 && on_checkpoint) {
                on_checkpoint(step_, false);
            }
        }
    }

    const StepLosses& last_losses() const { return last_losses_; }
    const std::vector<double>& triplet_loss_trace() const { return loss_trace_; }
    double best_validation_mrr() const { return best_valid_mrr_; }

    // Filtered KGE-only MRR over both query directions of the given base
    // triplets; used for validation during joint training.
    double kge_validation_mrr(const std::vector<Triplet>& base, RelationId num_base_relations,
                              const GraphIndex* known) const {
        double sum = 0.0;
        size_t n = 0;
        std::vector<double> scores;
        std::vector<uint8_t> mask(static_cast<size_t>(store_.num_entities()));
        auto one = [&](EntityId h, RelationId r, EntityId gold) {
            kge_scores_for_query(store_, h, r, cfg_.norm, scores);
            std::fill(mask.begin(), mask.end(), 0);
            if (known)
                for (EntityId t : known->neighbors(h, r)) mask[static_cast<size_t>(t)] = 1;
            mask[static_cast<size_t>(gold)] = 0;
            sum += 1.0 / expected_rank(scores, static_cast<size_t>(gold), &mask);
            ++n;
        };
        for (const Triplet& t : base) {
            one(t.head, t.rel, t.tail);
            one(t.tail, inv_relation(t.rel, num_base_relations), t.head);
        }
        return n ? sum / static_cast<double>(n) : 0.0;
    }

    // Exact-state persistence: EMBS (f32 arrays) + OPTS (f64 parameters,
    // Adam moments, RNG streams) so a resumed run continues bit-identically.
    void save_checkpoint(const std::string& path) const {
        std::vector<Section> sections;
        EmbeddingStore canon = store_;
        canon.canonicalize_angles();
        sections.push_back(canon.to_section());
        std::string rng_bundle = serialize_rng(rng_triplet_) + "\n" + serialize_rng(rng_rule_) +
                                 "\n" + triplet_sampler_.save_state() + "\n" +
                                 (rule_sampler_ ? rule_sampler_->save_state() : std::string()) +
                                 "\n" + std::to_string(step_) + "\n" +
                                 std::to_string(best_valid_mrr_);
        sections.push_back(adam_.to_section(store_, rng_bundle));
        write_container(path, sections);
    }

    void resume_from(const std::string& path) {
        auto sections = read_container(path);
        const Section* opts = find_section(sections, kSectionOptimizerState);
        if (!opts) throw std::runtime_error(path + ": checkpoint has no optimizer state");
        std::string bundle = adam_.from_section(*opts, store_);
        std::vector<std::string> parts;
        size_t start = 0;
        while (parts.size() < 5) {
            size_t nl = bundle.find('\n', start);
            parts.push_back(bundle.substr(start, nl - start));
            start = nl + 1;
        }
        parts.push_back(bundle.substr(start));
        deserialize_rng(rng_triplet_, parts[0]);
        deserialize_rng(rng_rule_, parts[1]);
        triplet_sampler_.load_state(parts[2]);
        if (rule_sampler_ && !parts[3].empty()) rule_sampler_->load_state(parts[3]);
        step_ = std::stoull(parts[4]);
        best_valid_mrr_ = std::stod(parts[5]);
    }

    // Applies one update for explicitly chosen batches (negatives included);
    // step() is the sampling wrapper around this.
    StepLosses apply_batches(const std::vector<size_t>& triplet_idx,
                             const std::vector<std::vector<Triplet>>& triplet_negs,
                             const std::vector<size_t>& rule_idx,
                             const std::vector<std::vector<Rule>>& rule_negs) {
        StepLosses losses;
        int nthreads = std::max(1, cfg_.threads);
        for (auto& g : grads_) g.reset(store_);

        double tscale = 1.0 / static_cast<double>(triplet_idx.size());
        double rscale = rule_idx.empty() ? 0.0 : cfg_.alpha / static_cast<double>(rule_idx.size());

        auto worker = [&](int tid, double& tloss, double& rloss) {
            GradBuffer& g = grads_[static_cast<size_t>(tid)];
            for (size_t i = static_cast<size_t>(tid); i < triplet_idx.size();
                 i += static_cast<size_t>(nthreads))
                tloss += triplet_loss(store_, graph_.triplets()[triplet_idx[i]], triplet_negs[i],
                                      cfg_.adv, cfg_.norm, &g, tscale);
            for (size_t i = static_cast<size_t>(tid); i < rule_idx.size();
                 i += static_cast<size_t>(nthreads))
                rloss += rule_loss(store_, rules_[static_cast<RuleId>(rule_idx[i])],
                                   static_cast<RuleId>(rule_idx[i]), rule_negs[i], cfg_.norm, &g,
                                   rscale);
        };

        std::vector<double> tparts(static_cast<size_t>(nthreads), 0.0);
        std::vector<double> rparts(static_cast<size_t>(nthreads), 0.0);
        if (nthreads == 1) {
            worker(0, tparts[0], rparts[0]);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nthreads; ++t)
                pool.emplace_back(worker, t, std::ref(tparts[static_cast<size_t>(t)]),
                                  std::ref(rparts[static_cast<size_t>(t)]));
            for (auto& th : pool) th.join();
            for (int t = 1; t < nthreads; ++t) grads_[0].merge(grads_[static_cast<size_t>(t)]);
        }

        for (double v : tparts) losses.triplet += v;
        for (double v : rparts) losses.rule += v;
        losses.triplet *= tscale;
        losses.rule = rule_idx.empty() ? 0.0 : losses.rule / static_cast<double>(rule_idx.size());

        double lambda_coeff = 0.0;
        if (cfg_.lambda > 0.0) {
            double denom = static_cast<double>(store_.num_entities()) *
                           static_cast<double>(store_.k());
            double sq = 0.0;
            for (double v : store_.entities_re()) sq += v * v;
            for (double v : store_.entities_im()) sq += v * v;
            losses.regularizer = cfg_.lambda * sq / denom;
            lambda_coeff = 2.0 * cfg_.lambda / denom;
        }

        if (!std::isfinite(losses.triplet) || !std::isfinite(losses.rule)) {
            std::string what = "non-finite loss at step " + std::to_string(step_ + 1) +
                               " (L_t=" + std::to_string(losses.triplet) +
                               ", L_r=" + std::to_string(losses.rule) + "); first batch triplet (";
            const Triplet& t0 = graph_.triplets()[triplet_idx[0]];
            what += std::to_string(t0.head) + "," + std::to_string(t0.rel) + "," +
                    std::to_string(t0.tail) + ")";
            throw std::runtime_error(what);
        }

        adam_.step(store_, grads_[0], lambda_coeff);
        return losses;
    }

private:
    const GraphIndex& graph_;
    const RuleSet& rules_;
    TrainConfig cfg_;
    EmbeddingStore store_;
    Rng rng_triplet_, rng_rule_;
    EpochSampler triplet_sampler_;
    std::optional<EpochSampler> rule_sampler_;
    AdamState adam_;
    std::vector<GradBuffer> grads_;
    uint64_t step_ = 0;
    StepLosses last_losses_;
    std::vector<double> loss_trace_;
    double best_valid_mrr_ = -1.0;
};

// Convenience wrapper: builds a trainer, runs the configured number of
// steps, returns the final store.
inline EmbeddingStore train_joint(const GraphIndex& graph, const RuleSet& rules,
                                  const TrainConfig& cfg,
                                  const std::vector<Triplet>* valid_base = nullptr,
                                  RelationId num_base_relations = 0,
                                  const GraphIndex* known_for_filtering = nullptr) {
    JointTrainer trainer(graph, rules, cfg);
    trainer.train(valid_base, num_base_relations, known_for_filtering);
    EmbeddingStore out = trainer.store();
    out.canonicalize_angles();
    return out;
}

}  // namespace rule
