#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rule/eval.hpp"
#include "rule/ground_train.hpp"
#include "rule/miner.hpp"
#include "rule/trainer.hpp"

namespace rule {

// Fully materialized run configuration. Sources, lowest priority first:
// built-in defaults, a named profile, a flat key=value config file, then
// command-line flags. The resolved config is echoed into the run's
// metadata sidecar.
struct RunConfig {
    std::string dataset_dir;
    std::string rules_file;
    std::string out_dir = "run";
    uint64_t seed = 0;
    int threads = 1;

    TrainConfig train;
    GroundingConfig grounding;
    MinerConfig miner;

    // inference / evaluation
    double beta = 0.2;
    ScoreMode score_mode = ScoreMode::Normalized;
    ScoreSource score_source = ScoreSource::Both;
    bool filtered = true;
    bool dump_scores = false;

    // analysis
    double corrupt_pct = 0.0;

    void set(const std::string& key, const std::string& value);
    std::string echo() const;
};

namespace detail {

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected a boolean, got \"" + v + "\"");
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
    auto u64 = [&] { return std::stoull(value); };
    auto f64 = [&] { return std::stod(value); };
    if (key == "dataset_dir") dataset_dir = value;
    else if (key == "rules_file") rules_file = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "seed") { seed = u64(); train.seed = seed; grounding.seed = seed; }
    else if (key == "threads") { threads = static_cast<int>(u64()); train.threads = threads; }
    else if (key == "dim" || key == "k") train.dim = u64();
    else if (key == "gamma_t") train.gamma_t = f64();
    else if (key == "gamma_r") train.gamma_r = f64();
    else if (key == "alpha") train.alpha = f64();
    else if (key == "lr") train.lr = f64();
    else if (key == "adv") train.adv = f64();
    else if (key == "lambda") train.lambda = f64();
    else if (key == "neg_triplets") train.neg_triplets = u64();
    else if (key == "neg_rules") train.neg_rules = u64();
    else if (key == "batch_triplets" || key == "bt") train.batch_triplets = u64();
    else if (key == "batch_rules" || key == "br") train.batch_rules = u64();
    else if (key == "steps") train.steps = u64();
    else if (key == "eval_every") train.eval_every = u64();
    else if (key == "save_every") train.save_every = u64();
    else if (key == "patience") train.patience = u64();
    else if (key == "kge") {
        if (value == "rotate") train.kge_backend = KgeBackend::Rotate;
        else if (value == "transe") train.kge_backend = KgeBackend::Transe;
        else throw std::invalid_argument("kge must be rotate|transe, got \"" + value + "\"");
    } else if (key == "rule_variant") {
        if (value == "default") train.rule_variant = RuleVariant::Default;
        else if (value == "positional") train.rule_variant = RuleVariant::Positional;
        else throw std::invalid_argument("rule_variant must be default|positional");
    } else if (key == "norm") {
        if (value == "l1" || value == "L1") train.norm = Norm::L1;
        else if (value == "l2" || value == "L2") train.norm = Norm::L2;
        else throw std::invalid_argument("norm must be l1|l2");
    }
    else if (key == "grounding_lr" || key == "g_lr") grounding.lr = f64();
    else if (key == "grounding_batch" || key == "gb") grounding.batch = u64();
    else if (key == "grounding_epochs") grounding.epochs = u64();
    else if (key == "hidden") grounding.hidden = u64();
    else if (key == "grounding") {
        if (value == "scalar") grounding.finegrained = false;
        else if (value == "finegrained") grounding.finegrained = true;
        else throw std::invalid_argument("grounding must be scalar|finegrained");
    } else if (key == "p") grounding.p = f64();
    else if (key == "agg") {
        if (value == "mlp") grounding.agg = GroundingAgg::Mlp;
        else if (value == "sum") grounding.agg = GroundingAgg::Sum;
        else if (value == "max") grounding.agg = GroundingAgg::Max;
        else if (value == "hard") grounding.agg = GroundingAgg::Hard;
        else throw std::invalid_argument("agg must be mlp|sum|max|hard");
    }
    else if (key == "miner_max_len") miner.max_len = static_cast<int>(u64());
    else if (key == "miner_min_support") miner.min_support = static_cast<int64_t>(u64());
    else if (key == "miner_top_k") miner.top_k_per_head = static_cast<int>(u64());
    else if (key == "beta") beta = f64();
    else if (key == "score_mode") {
        if (value == "normalized") score_mode = ScoreMode::Normalized;
        else if (value == "eq8" || value == "raw") score_mode = ScoreMode::RawSum;
        else throw std::invalid_argument("score_mode must be normalized|eq8");
    } else if (key == "score") {
        if (value == "emb") score_source = ScoreSource::Emb;
        else if (value == "rule") score_source = ScoreSource::Rule;
        else if (value == "both") score_source = ScoreSource::Both;
        else throw std::invalid_argument("score must be emb|rule|both");
    }
    else if (key == "filtered") filtered = detail::parse_bool(value);
    else if (key == "dump_scores") dump_scores = detail::parse_bool(value);
    else if (key == "corrupt_pct") corrupt_pct = f64();
    else throw std::invalid_argument("unknown config key \"" + key + "\"");
}

// Flat "key=value" lines; '#' starts a comment.
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        try {
            cfg.set(detail::trim(trimmed.substr(0, eq)), detail::trim(trimmed.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

// Per-dataset profiles mirroring the published hyperparameter table.
inline void apply_profile(RunConfig& cfg, const std::string& name) {
    auto apply = [&cfg](std::initializer_list<std::pair<const char*, const char*>> kv) {
        for (const auto& [k, v] : kv) cfg.set(k, v);
    };
    if (name == "umls")
        apply({{"dim", "2000"}, {"bt", "256"}, {"br", "256"}, {"gamma_t", "6"}, {"gamma_r", "8"},
               {"lr", "0.0001"}, {"adv", "0.25"}, {"lambda", "0"}, {"alpha", "1"},
               {"g_lr", "0.0001"}, {"gb", "16"}, {"beta", "0.20"}});
    else if (name == "kinship")
        apply({{"dim", "2000"}, {"bt", "256"}, {"br", "256"}, {"gamma_t", "6"}, {"gamma_r", "5"},
               {"lr", "0.0001"}, {"adv", "0.25"}, {"lambda", "0.1"}, {"alpha", "3"},
               {"g_lr", "0.0005"}, {"gb", "32"}, {"beta", "0.35"}});
    else if (name == "family")
        apply({{"dim", "2000"}, {"bt", "256"}, {"br", "256"}, {"gamma_t", "6"}, {"gamma_r", "1"},
               {"lr", "0.0001"}, {"adv", "1.0"}, {"lambda", "1.0"}, {"alpha", "1"},
               {"g_lr", "0.0001"}, {"gb", "32"}, {"beta", "0.35"}});
    else if (name == "fb15k-237")
        apply({{"dim", "1000"}, {"bt", "1024"}, {"br", "128"}, {"gamma_t", "9"}, {"gamma_r", "9"},
               {"lr", "0.00005"}, {"adv", "1.0"}, {"lambda", "0"}, {"alpha", "3"},
               {"g_lr", "0.005"}, {"gb", "32"}, {"beta", "0.50"}});
    else if (name == "wn18rr")
        apply({{"dim", "500"}, {"bt", "512"}, {"br", "256"}, {"gamma_t", "6"}, {"gamma_r", "2"},
               {"lr", "0.00005"}, {"adv", "0.5"}, {"lambda", "0.1"}, {"alpha", "0.5"},
               {"g_lr", "0.005"}, {"gb", "32"}, {"beta", "0.60"}});
    else if (name == "yago3-10")
        apply({{"dim", "500"}, {"bt", "1024"}, {"br", "256"}, {"gamma_t", "24"},
               {"gamma_r", "24"}, {"lr", "0.005"}, {"adv", "1.0"}, {"lambda", "0"},
               {"alpha", "10"}, {"g_lr", "0.01"}, {"gb", "16"}, {"beta", "0.10"}});
    else
        throw std::invalid_argument("unknown profile \"" + name +
                                    "\" (umls|kinship|family|fb15k-237|wn18rr|yago3-10)");
}

inline std::string RunConfig::echo() const {
    std::ostringstream os;
    os << "dataset_dir=" << dataset_dir << '\n'
       << "rules_file=" << rules_file << '\n'
       << "out_dir=" << out_dir << '\n'
       << "seed=" << seed << '\n'
       << "threads=" << threads << '\n'
       << "dim=" << train.dim << '\n'
       << "gamma_t=" << train.gamma_t << '\n'
       << "gamma_r=" << train.gamma_r << '\n'
       << "alpha=" << train.alpha << '\n'
       << "lr=" << train.lr << '\n'
       << "adv=" << train.adv << '\n'
       << "lambda=" << train.lambda << '\n'
       << "neg_triplets=" << train.neg_triplets << '\n'
       << "neg_rules=" << train.neg_rules << '\n'
       << "batch_triplets=" << train.batch_triplets << '\n'
       << "batch_rules=" << train.batch_rules << '\n'
       << "steps=" << train.steps << '\n'
       << "eval_every=" << train.eval_every << '\n'
       << "save_every=" << train.save_every << '\n'
       << "patience=" << train.patience << '\n'
       << "kge=" << to_string(train.kge_backend) << '\n'
       << "rule_variant=" << to_string(train.rule_variant) << '\n'
       << "norm=" << (train.norm == Norm::L1 ? "l1" : "l2") << '\n'
       << "grounding_lr=" << grounding.lr << '\n'
       << "grounding_batch=" << grounding.batch << '\n'
       << "grounding_epochs=" << grounding.epochs << '\n'
       << "hidden=" << grounding.hidden << '\n'
       << "grounding=" << (grounding.finegrained ? "finegrained" : "scalar") << '\n'
       << "p=" << grounding.p << '\n'
       << "agg=" << to_string(grounding.agg) << '\n'
       << "miner_max_len=" << miner.max_len << '\n'
       << "miner_min_support=" << miner.min_support << '\n'
       << "miner_top_k=" << miner.top_k_per_head << '\n'
       << "beta=" << beta << '\n'
       << "score_mode=" << (score_mode == ScoreMode::Normalized ? "normalized" : "eq8") << '\n'
       << "score=" << to_string(score_source) << '\n'
       << "filtered=" << (filtered ? "true" : "false") << '\n'
       << "dump_scores=" << (dump_scores ? "true" : "false") << '\n'
       << "corrupt_pct=" << corrupt_pct << '\n';
    return os.str();
}

// RULE_DATA_DIR provides the default dataset root.
inline std::string default_data_root() {
    const char* env = std::getenv("RULE_DATA_DIR");
    return env ? env : "data";
}

}  // namespace rule
