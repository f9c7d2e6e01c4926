// Command-line front end for the full pipeline:
//   prepare -> mine -> train-joint -> train-grounding -> eval / analyze / score.
#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "rule/analysis.hpp"
#include "rule/config.hpp"
#include "rule/eval.hpp"
#include "rule/miner.hpp"
#include "rule/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliState {
    rule::RunConfig cfg;
    std::string profile;
    std::string config_path;
    std::vector<std::string> sets;  // raw key=value overrides
    // flag storage; applied in priority order after parse
    std::vector<std::pair<std::string, std::string>> flag_values;
};

// Registers the shared flags on a subcommand. CLI11 fills the storage; the
// resolution order (defaults < profile < config file < flags) is applied in
// resolve().
void add_common_options(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "flat key=value config file");
    cmd->add_option("--profile", st.profile,
                    "bundled per-dataset profile (umls|kinship|family|fb15k-237|wn18rr|yago3-10)");
    auto flag = [cmd, &st](const std::string& name, const std::string& key,
                           const std::string& help) {
        cmd->add_option_function<std::string>(
            name, [&st, key](const std::string& v) { st.flag_values.emplace_back(key, v); },
            help);
    };
    flag("--dataset", "dataset_dir", "dataset directory (train/valid/test.txt)");
    flag("--rules", "rules_file", "rule file path");
    flag("--out", "out_dir", "output directory");
    flag("--seed", "seed", "RNG seed");
    flag("--threads", "threads", "worker threads (1 = fully deterministic)");
    flag("--kge", "kge", "KGE backend: rotate|transe");
    flag("--rule-variant", "rule_variant", "rule distance: default|positional");
    flag("--grounding", "grounding", "confidence mode: scalar|finegrained");
    flag("--agg", "agg", "grounding aggregator: mlp|sum|max|hard");
    flag("--score-mode", "score_mode", "integration: normalized|eq8");
    flag("--score", "score", "score source: emb|rule|both");
    flag("--filtered", "filtered", "filtered ranking: true|false");
    flag("--beta", "beta", "inference blend weight");
    flag("--alpha", "alpha", "rule-loss weight");
    flag("--steps", "steps", "training steps");
    flag("--dim", "dim", "embedding dimension k");
    cmd->add_option("--set", st.sets, "extra key=value overrides")->take_all();
}

void resolve(CliState& st) {
    if (st.cfg.dataset_dir.empty()) st.cfg.dataset_dir = rule::default_data_root();
    if (!st.profile.empty()) rule::apply_profile(st.cfg, st.profile);
    if (!st.config_path.empty()) rule::load_config_file(st.cfg, st.config_path);
    for (const auto& [k, v] : st.flag_values) st.cfg.set(k, v);
    for (const std::string& s : st.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got \"" + s + "\"");
        st.cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
}

json config_echo_json(const rule::RunConfig& cfg) {
    json j;
    std::istringstream is(cfg.echo());
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j;
}

void write_meta(const rule::RunConfig& cfg, const std::string& command, const json& extra) {
    fs::create_directories(cfg.out_dir);
    json meta;
    meta["command"] = command;
    meta["seed"] = cfg.seed;
    meta["config"] = config_echo_json(cfg);
    for (auto& [k, v] : extra.items()) meta[k] = v;
    std::ofstream out(cfg.out_dir + "/" + command + ".meta.json");
    out << meta.dump(2) << '\n';
    std::ofstream echo(cfg.out_dir + "/" + command + ".config");
    echo << cfg.echo();
}

rule::Dataset load_dataset_checked(const std::string& dir) {
    for (const char* f : {"train.txt", "valid.txt", "test.txt"})
        if (!fs::exists(dir + "/" + f))
            throw std::runtime_error("dataset directory " + dir + " is missing " + f +
                                     " (expected train.txt, valid.txt, test.txt)");
    return rule::load_dataset(dir);
}

// Shared evaluation assembly for `eval` and `score`.
struct LoadedBundle {
    rule::Dataset data;
    rule::RuleSet rules;
    rule::EmbeddingStore store;
    rule::GroundingMlp mlp;
    std::unique_ptr<rule::GraphIndex> train_graph;
    std::unique_ptr<rule::GraphIndex> known;
    std::unique_ptr<rule::GroundingEngine> engine;
    rule::ModelBundle bundle;
};

LoadedBundle load_bundle(const rule::RunConfig& cfg, bool need_grounding) {
    LoadedBundle b;
    b.data = load_dataset_checked(cfg.dataset_dir);
    std::string ckpt = cfg.out_dir + "/checkpoint.bin";
    if (!fs::exists(ckpt)) throw std::runtime_error("missing stage-1 checkpoint: " + ckpt);
    auto sections = rule::read_container(ckpt);
    const rule::Section* embs = rule::find_section(sections, rule::kSectionEmbeddings);
    if (!embs) throw std::runtime_error(ckpt + ": no embedding section");
    b.store = rule::EmbeddingStore::from_section(*embs);

    rule::RelationId nb = b.data.num_base_relations();
    auto train_aug = rule::augment_inverses(b.data.train, nb);
    b.train_graph = std::make_unique<rule::GraphIndex>(train_aug, b.data.num_entities(), 2 * nb);
    std::vector<rule::Triplet> all = train_aug;
    for (const auto& t : rule::augment_inverses(b.data.valid, nb)) all.push_back(t);
    for (const auto& t : rule::augment_inverses(b.data.test, nb)) all.push_back(t);
    b.known = std::make_unique<rule::GraphIndex>(all, b.data.num_entities(), 2 * nb);

    b.bundle.store = &b.store;
    b.bundle.known = b.known.get();
    b.bundle.num_base_relations = nb;

    if (need_grounding) {
        if (cfg.rules_file.empty()) throw std::runtime_error("--rules is required here");
        b.rules = rule::load_rules(cfg.rules_file, b.data.relations);
        b.engine = std::make_unique<rule::GroundingEngine>(*b.train_graph, b.rules);
        std::string gpath = cfg.out_dir + "/grounding.bin";
        if (!fs::exists(gpath)) throw std::runtime_error("missing grounding model: " + gpath);
        auto gsec = rule::read_container(gpath);
        const rule::Section* gmlp = rule::find_section(gsec, rule::kSectionGroundingMlp);
        if (!gmlp) throw std::runtime_error(gpath + ": no grounding model section");
        b.mlp = rule::GroundingMlp::from_section(*gmlp, b.rules.fingerprint());
        b.bundle.engine = b.engine.get();
        b.bundle.mlp = &b.mlp;
    }
    return b;
}

json report_json(const rule::EvalReport& r, bool with_ranks) {
    json j;
    j["mrr"] = r.mrr;
    j["hits1"] = r.hits1;
    j["hits3"] = r.hits3;
    j["hits10"] = r.hits10;
    j["n_queries"] = r.n_queries;
    if (with_ranks) j["ranks"] = r.ranks;
    return j;
}

int cmd_prepare(CliState& st) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    rule::Dataset data = load_dataset_checked(cfg.dataset_dir);
    rule::RelationId nb = data.num_base_relations();
    auto train_aug = rule::augment_inverses(data.train, nb);

    fs::create_directories(cfg.out_dir);
    data.entities.save(cfg.out_dir + "/entities.dict");
    rule::Vocabulary rel_aug;
    for (rule::RelationId r = 0; r < 2 * nb; ++r)
        rel_aug.get_or_add(rule::relation_display_name(r, data.relations));
    rel_aug.save(cfg.out_dir + "/relations.dict");
    rule::save_triplet_ids(cfg.out_dir + "/train_augmented.txt", train_aug);

    json manifest;
    manifest["num_entities"] = data.num_entities();
    manifest["num_base_relations"] = nb;
    manifest["num_relations_augmented"] = 2 * nb;
    manifest["counts"] = {{"train", data.train.size()},
                          {"valid", data.valid.size()},
                          {"test", data.test.size()},
                          {"train_augmented", train_aug.size()}};
    manifest["files"] = {{"entities", "entities.dict"},
                         {"relations", "relations.dict"},
                         {"train_augmented", "train_augmented.txt"}};
    std::ofstream(cfg.out_dir + "/manifest.json") << manifest.dump(2) << '\n';
    write_meta(cfg, "prepare", {});
    std::cout << "prepared " << cfg.dataset_dir << ": " << data.num_entities() << " entities, "
              << nb << " base relations (" << 2 * nb << " augmented), " << data.train.size()
              << "/" << data.valid.size() << "/" << data.test.size() << " triplets\n";
    return 0;
}

int cmd_mine(CliState& st) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    rule::Dataset data = load_dataset_checked(cfg.dataset_dir);
    rule::RelationId nb = data.num_base_relations();
    auto train_aug = rule::augment_inverses(data.train, nb);
    rule::GraphIndex graph(train_aug, data.num_entities(), 2 * nb);
    rule::RuleSet mined = rule::mine_candidate_rules(graph, cfg.miner);
    fs::create_directories(cfg.out_dir);
    std::string out = cfg.rules_file.empty() ? cfg.out_dir + "/rules_mined.txt" : cfg.rules_file;
    rule::save_rules(out, mined, data.relations);
    write_meta(cfg, "mine", {{"rules_mined", mined.size()}, {"rules_path", out}});
    std::cout << "mined " << mined.size() << " rules -> " << out << '\n';
    return 0;
}

int cmd_train_joint(CliState& st, const std::string& resume_path) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    rule::Dataset data = load_dataset_checked(cfg.dataset_dir);
    rule::RelationId nb = data.num_base_relations();
    rule::RuleSet rules;
    if (!cfg.rules_file.empty()) rules = rule::load_rules(cfg.rules_file, data.relations);
    auto train_aug = rule::augment_inverses(data.train, nb);
    rule::GraphIndex graph(train_aug, data.num_entities(), 2 * nb);

    // filtering for validation covers train+valid facts
    std::vector<rule::Triplet> tv = train_aug;
    for (const auto& t : rule::augment_inverses(data.valid, nb)) tv.push_back(t);
    rule::GraphIndex known_tv(tv, data.num_entities(), 2 * nb);

    if (cfg.train.eval_every == 0) cfg.train.eval_every = std::max<size_t>(1, cfg.train.steps / 10);
    rule::JointTrainer trainer(graph, rules, cfg.train);
    if (!resume_path.empty()) trainer.resume_from(resume_path);

    fs::create_directories(cfg.out_dir);
    std::string ckpt = cfg.out_dir + "/checkpoint.bin";
    std::string best = cfg.out_dir + "/checkpoint_best.bin";
    auto t0 = std::chrono::steady_clock::now();
    trainer.train(
        &data.valid, nb, &known_tv,
        [&](uint64_t step, double mrr) {
            auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
            std::cout << "step " << step << "  L_t " << trainer.last_losses().triplet << "  L_r "
                      << trainer.last_losses().rule << "  valid-MRR(kge) " << mrr << "  ["
                      << static_cast<int>(dt.count()) << "s]\n"
                      << std::flush;
        },
        [&](uint64_t, bool is_best) {
            trainer.save_checkpoint(ckpt);
            if (is_best) {
                rule::EmbeddingStore canon = trainer.store();
                canon.canonicalize_angles();
                rule::write_container(best, {canon.to_section()});
            }
        });
    trainer.save_checkpoint(ckpt);
    if (!fs::exists(best)) {
        rule::EmbeddingStore canon = trainer.store();
        canon.canonicalize_angles();
        rule::write_container(best, {canon.to_section()});
    }
    write_meta(cfg, "train-joint",
               {{"steps_done", trainer.steps_done()},
                {"final_loss_triplet", trainer.last_losses().triplet},
                {"final_loss_rule", trainer.last_losses().rule},
                {"best_valid_mrr", trainer.best_validation_mrr()},
                {"rules_loaded", rules.size()}});
    std::cout << "checkpoint -> " << ckpt << '\n';
    return 0;
}

int cmd_train_grounding(CliState& st) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    LoadedBundle b;
    b.data = load_dataset_checked(cfg.dataset_dir);
    if (cfg.rules_file.empty()) throw std::runtime_error("--rules is required for train-grounding");
    b.rules = rule::load_rules(cfg.rules_file, b.data.relations);

    std::string ckpt = cfg.out_dir + "/checkpoint.bin";
    if (!fs::exists(ckpt)) throw std::runtime_error("missing stage-1 checkpoint: " + ckpt);
    auto sections = rule::read_container(ckpt);
    const rule::Section* embs = rule::find_section(sections, rule::kSectionEmbeddings);
    if (!embs) throw std::runtime_error(ckpt + ": no embedding section");
    rule::EmbeddingStore store = rule::EmbeddingStore::from_section(*embs);
    if (store.num_rules() != 0 && store.num_rules() != b.rules.size())
        throw std::runtime_error("checkpoint was trained with a different rule count");

    rule::RelationId nb = b.data.num_base_relations();
    auto train_aug = rule::augment_inverses(b.data.train, nb);
    rule::GraphIndex graph(train_aug, b.data.num_entities(), 2 * nb);
    rule::GroundingEngine engine(graph, b.rules);

    std::vector<double> nll;
    rule::GroundingMlp mlp = rule::train_grounding(engine, store, train_aug, nb, cfg.grounding,
                                                   cfg.train.norm, &nll);
    rule::write_container(cfg.out_dir + "/grounding.bin",
                          {mlp.to_section(b.rules.fingerprint())});
    write_meta(cfg, "train-grounding",
               {{"epochs", cfg.grounding.epochs}, {"nll_per_epoch", nll}});
    std::cout << "grounding model -> " << cfg.out_dir << "/grounding.bin";
    if (!nll.empty()) std::cout << "  (final NLL " << nll.back() << ")";
    std::cout << '\n';
    return 0;
}

int cmd_eval(CliState& st) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    LoadedBundle b = load_bundle(cfg, cfg.score_source != rule::ScoreSource::Emb);

    rule::EvalOptions opts;
    opts.source = cfg.score_source;
    opts.mode = cfg.score_mode;
    opts.beta = cfg.beta;
    opts.filtered = cfg.filtered;
    opts.keep_ranks = cfg.dump_scores;
    opts.norm = cfg.train.norm;
    opts.grounding = cfg.grounding;

    std::ofstream dump;
    rule::QueryCallback on_query;
    if (cfg.dump_scores) {
        dump.open(cfg.out_dir + "/scores.tsv");
        on_query = [&dump](const rule::QueryOutcome& q) {
            dump << q.head << '\t' << q.rel << '\t' << q.gold << '\t' << q.rank;
            for (double s : *q.scores) dump << '\t' << s;
            dump << '\n';
        };
    }

    rule::EvalReport report = rule::evaluate(b.bundle, b.data.test, opts, on_query);
    fs::create_directories(cfg.out_dir);
    std::string tag = std::string("eval_") + rule::to_string(cfg.score_source);
    std::ofstream(cfg.out_dir + "/" + tag + ".txt") << report.to_text() << '\n';
    std::ofstream(cfg.out_dir + "/" + tag + ".json")
        << report_json(report, cfg.dump_scores).dump(2) << '\n';
    write_meta(cfg, "eval", {{"report", report_json(report, false)}});
    std::cout << "[" << rule::to_string(cfg.score_source) << "] " << report.to_text() << '\n';
    return 0;
}

int cmd_analyze(CliState& st) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    rule::Dataset data = load_dataset_checked(cfg.dataset_dir);
    std::vector<rule::Triplet> all = data.train;
    all.insert(all.end(), data.valid.begin(), data.valid.end());
    all.insert(all.end(), data.test.begin(), data.test.end());

    if (cfg.corrupt_pct > 0.0) {
        rule::Rng rng(rule::mix_seed(cfg.seed, 99));
        all = rule::corrupt_triplets(all, cfg.corrupt_pct, data.num_entities(),
                                     data.num_base_relations(), rng);
    }
    rule::CycleReport r = rule::cycle_edge_proportion(all, data.num_entities());
    json j;
    j["proportion_2cycle"] = r.proportion_2cycle;
    j["proportion_3cycle"] = r.proportion_3cycle;
    j["proportion_le3cycle"] = r.proportion_le3cycle;
    j["total_edges"] = r.total_edges;
    j["corrupt_pct"] = cfg.corrupt_pct;
    fs::create_directories(cfg.out_dir);
    std::ofstream(cfg.out_dir + "/analysis.json") << j.dump(2) << '\n';
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "edges %zu  2-cycle %.3f  3-cycle %.3f  <=3-cycle %.3f", r.total_edges,
                  r.proportion_2cycle, r.proportion_3cycle, r.proportion_le3cycle);
    std::ofstream(cfg.out_dir + "/analysis.txt") << buf << '\n';
    std::cout << buf << '\n';
    return 0;
}

int cmd_score(CliState& st, const std::string& head, const std::string& rel, int topk) {
    resolve(st);
    rule::RunConfig& cfg = st.cfg;
    LoadedBundle b = load_bundle(cfg, cfg.score_source != rule::ScoreSource::Emb);

    rule::EntityId h = b.data.entities.find(head);
    if (h < 0) throw std::runtime_error("unknown entity \"" + head + "\"");
    rule::RelationId r = rule::resolve_relation_token(rel, b.data.relations);
    if (r < 0) throw std::runtime_error("unknown relation \"" + rel + "\"");

    rule::EvalOptions opts;
    opts.source = cfg.score_source;
    opts.mode = cfg.score_mode;
    opts.beta = cfg.beta;
    opts.norm = cfg.train.norm;
    opts.grounding = cfg.grounding;

    std::vector<double> kge, ground;
    rule::kge_scores_for_query(b.store, h, r, opts.norm, kge);
    std::vector<double> final_scores = kge;
    if (cfg.score_source != rule::ScoreSource::Emb) {
        auto conf = rule::all_rule_confidences(b.store, b.rules, opts.norm);
        std::vector<double> conf_matrix;
        if (opts.grounding.finegrained)
            conf_matrix = rule::all_rule_confidence_vectors(b.store, b.rules, opts.grounding.p);
        rule::grounding_scores_for_query(b.bundle, h, r, opts, conf,
                                         opts.grounding.finegrained ? &conf_matrix : nullptr,
                                         ground);
        final_scores = cfg.score_source == rule::ScoreSource::Rule
                           ? ground
                           : rule::integrated_score(kge, ground, opts.beta, opts.mode);
    } else {
        ground.assign(kge.size(), 0.0);
    }

    std::vector<size_t> order(final_scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t bb) { return final_scores[a] > final_scores[bb]; });
    topk = std::min<int>(topk, static_cast<int>(order.size()));
    std::cout << "query (" << head << ", " << rel << ", ?)\n";
    for (int i = 0; i < topk; ++i) {
        size_t e = order[static_cast<size_t>(i)];
        std::cout << i + 1 << ". " << b.data.entities.name(static_cast<int32_t>(e)) << "  s="
                  << final_scores[e] << "  s_t=" << kge[e] << "  s_g=" << ground[e] << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph reasoning with joint entity/relation/rule embeddings"};
    app.require_subcommand(1);

    CliState st;
    std::string resume_path, score_head, score_rel;
    int topk = 10;

    add_common_options(app.add_subcommand("prepare", "augment a dataset and write dictionaries"),
                       st);
    add_common_options(app.add_subcommand("mine", "mine candidate chain rules from train"), st);
    auto* tj = app.add_subcommand("train-joint", "stage 1: joint embedding training");
    add_common_options(tj, st);
    tj->add_option("--resume", resume_path, "resume from a checkpoint with optimizer state");
    add_common_options(app.add_subcommand("train-grounding", "stage 2: grounding MLP training"),
                       st);
    add_common_options(app.add_subcommand("eval", "rank test queries and report MRR/Hits"), st);
    add_common_options(app.add_subcommand("analyze", "cycle-proportion indicator"), st);
    auto* sc = app.add_subcommand("score", "score a single (head, relation, ?) query");
    add_common_options(sc, st);
    sc->add_option("--head", score_head, "head entity name")->required();
    sc->add_option("--rel", score_rel, "relation name (\"name\" or \"name^-1\")")->required();
    sc->add_option("--topk", topk, "entities to print");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("prepare")) return cmd_prepare(st);
        if (app.got_subcommand("mine")) return cmd_mine(st);
        if (app.got_subcommand("train-joint")) return cmd_train_joint(st, resume_path);
        if (app.got_subcommand("train-grounding")) return cmd_train_grounding(st);
        if (app.got_subcommand("eval")) return cmd_eval(st);
        if (app.got_subcommand("analyze")) return cmd_analyze(st);
        if (app.got_subcommand("score")) return cmd_score(st, score_head, score_rel, topk);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
