#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "rule/types.hpp"
#include "rule/vocab.hpp"

namespace rule {

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t' || c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

}  // namespace detail

// Reads "head<TAB>relation<TAB>tail" lines, growing the vocabularies in
// first-appearance order. Duplicate lines are stored once.
inline std::vector<Triplet> load_triplets(const std::string& path, Vocabulary& entities,
                                          Vocabulary& relations) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triplet file: " + path);
    std::vector<Triplet> out;
    std::unordered_set<Triplet, TripletHash> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        // triplet fields are TAB-separated; names may contain spaces
        std::vector<std::string> f;
        {
            std::stringstream ss(trimmed);
            std::string tok;
            while (std::getline(ss, tok, '\t')) f.push_back(detail::trim(tok));
        }
        if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 3 TAB-separated fields");
        Triplet t{entities.get_or_add(f[0]), relations.get_or_add(f[1]),
                  entities.get_or_add(f[2])};
        if (seen.insert(t).second) out.push_back(t);
    }
    if (out.empty()) throw std::runtime_error(path + ": no triplets found");
    return out;
}

// Adds (t, inv(r), h) for every (h, r, t); relation ids >= num_base_relations
// denote inverses. Set semantics.
inline std::vector<Triplet> augment_inverses(const std::vector<Triplet>& triplets,
                                             RelationId num_base_relations) {
    std::vector<Triplet> out;
    out.reserve(triplets.size() * 2);
    std::unordered_set<Triplet, TripletHash> seen;
    for (const Triplet& t : triplets) {
        if (t.rel >= num_base_relations)
            throw std::invalid_argument("augment_inverses: relation id already augmented");
        if (seen.insert(t).second) out.push_back(t);
    }
    for (const Triplet& t : triplets) {
        Triplet inv{t.tail, inv_relation(t.rel, num_base_relations), t.head};
        if (seen.insert(inv).second) out.push_back(inv);
    }
    return out;
}

inline void save_triplet_ids(const std::string& path, const std::vector<Triplet>& triplets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write triplet file: " + path);
    for (const Triplet& t : triplets) out << t.head << '\t' << t.rel << '\t' << t.tail << '\n';
}

inline const std::string kInverseSuffix = "^-1";

// Name for an augmented relation id, deriving "<name>^-1" for inverses.
inline std::string relation_display_name(RelationId r, const Vocabulary& base_relations) {
    RelationId nb = base_relations.size();
    if (r < nb) return base_relations.name(r);
    return base_relations.name(r - nb) + kInverseSuffix;
}

// Accepts a base name, "<name>^-1", or a bare augmented id.
inline RelationId resolve_relation_token(const std::string& token,
                                         const Vocabulary& base_relations) {
    RelationId nb = base_relations.size();
    int32_t id = base_relations.find(token);
    if (id >= 0) return id;
    if (token.size() > kInverseSuffix.size() &&
        token.compare(token.size() - kInverseSuffix.size(), kInverseSuffix.size(),
                      kInverseSuffix) == 0) {
        int32_t base = base_relations.find(token.substr(0, token.size() - kInverseSuffix.size()));
        if (base >= 0) return inv_relation(base, nb);
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec == std::errc() && ptr == token.data() + token.size() && value >= 0 && value < 2 * nb)
        return static_cast<RelationId>(value);
    return -1;
}

// Ordered rule list plus membership lookup; ordering fixes the meaning of
// rule ids everywhere downstream (encodings, MLP input slots, fingerprints).
class RuleSet {
public:
    RuleSet() = default;
    explicit RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
        for (const Rule& r : rules_) membership_.insert(r);
    }

    void add(Rule r) {
        if (contains(r)) return;
        membership_.insert(r);
        rules_.push_back(std::move(r));
    }

    bool contains(const Rule& r) const { return membership_.count(r) > 0; }
    const Rule& operator[](RuleId i) const { return rules_[static_cast<size_t>(i)]; }
    size_t size() const { return rules_.size(); }
    bool empty() const { return rules_.empty(); }
    const std::vector<Rule>& rules() const { return rules_; }

    // FNV-1a over (head, length, body...) in rule order; embedded in model
    // files so a grounding model cannot be applied to a different rule list.
    uint64_t fingerprint() const {
        uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](uint64_t v) {
            h ^= v;
            h *= 0x100000001b3ULL;
        };
        mix(rules_.size());
        for (const Rule& r : rules_) {
            mix(static_cast<uint32_t>(r.head));
            mix(r.body.size());
            for (RelationId b : r.body) mix(static_cast<uint32_t>(b));
        }
        return h;
    }

private:
    std::vector<Rule> rules_;
    std::unordered_set<Rule, RuleHash> membership_;
};

// One rule per line: "head_rel body_rel_1 ... body_rel_l [prior]".
// Body order is preserved exactly as written.
inline RuleSet load_rules(const std::string& path, const Vocabulary& base_relations,
                          size_t max_len = 0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rule file: " + path);
    std::vector<Rule> rules;
    std::unordered_set<Rule, RuleHash> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> f = detail::split_fields(line);
        if (f.empty()) continue;
        auto where = [&] { return path + ":" + std::to_string(lineno); };
        Rule r;
        double prior = 0.0;
        size_t n = f.size();
        // trailing float (not resolvable as a relation) is the optional prior
        if (n >= 3 && resolve_relation_token(f[n - 1], base_relations) < 0 &&
            detail::parse_double(f[n - 1], prior)) {
            r.prior = prior;
            r.has_prior = true;
            --n;
        }
        if (n < 2) throw std::runtime_error(where() + ": rule needs a head and a body");
        r.head = resolve_relation_token(f[0], base_relations);
        if (r.head < 0) throw std::runtime_error(where() + ": unknown relation \"" + f[0] + "\"");
        for (size_t i = 1; i < n; ++i) {
            RelationId b = resolve_relation_token(f[i], base_relations);
            if (b < 0) throw std::runtime_error(where() + ": unknown relation \"" + f[i] + "\"");
            r.body.push_back(b);
        }
        if (max_len > 0 && r.body.size() > max_len)
            throw std::runtime_error(where() + ": body length " + std::to_string(r.body.size()) +
                                     " exceeds maximum " + std::to_string(max_len));
        if (seen.insert(r).second) rules.push_back(std::move(r));
    }
    return RuleSet(std::move(rules));
}

inline void save_rules(const std::string& path, const RuleSet& rules,
                       const Vocabulary& base_relations) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write rule file: " + path);
    for (const Rule& r : rules.rules()) {
        out << relation_display_name(r.head, base_relations);
        for (RelationId b : r.body) out << '\t' << relation_display_name(b, base_relations);
        if (r.has_prior) out << '\t' << r.prior;
        out << '\n';
    }
}

// A dataset directory: train/valid/test triplet files with shared
// vocabularies grown in file order (train first).
struct Dataset {
    Vocabulary entities;
    Vocabulary relations;  // base relations only
    std::vector<Triplet> train, valid, test;

    RelationId num_base_relations() const { return relations.size(); }
    RelationId num_relations_augmented() const { return 2 * relations.size(); }
    EntityId num_entities() const { return entities.size(); }
};

inline Dataset load_dataset(const std::string& dir) {
    Dataset d;
    d.train = load_triplets(dir + "/train.txt", d.entities, d.relations);
    d.valid = load_triplets(dir + "/valid.txt", d.entities, d.relations);
    d.test = load_triplets(dir + "/test.txt", d.entities, d.relations);
    return d;
}

}  // namespace rule
