#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rule {

// Bidirectional string <-> dense id map. Ids are assigned in
// first-appearance order; names are case-sensitive and pre-trimmed by
// the loaders.
class Vocabulary {
public:
    int32_t get_or_add(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        int32_t id = static_cast<int32_t>(names_.size());
        names_.push_back(name);
        index_.emplace(names_.back(), id);
        return id;
    }

    // -1 if absent.
    int32_t find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    const std::string& name(int32_t id) const {
        if (id < 0 || id >= static_cast<int32_t>(names_.size()))
            throw std::out_of_range("Vocabulary: id " + std::to_string(id) + " out of range");
        return names_[static_cast<size_t>(id)];
    }

    int32_t size() const { return static_cast<int32_t>(names_.size()); }
    bool empty() const { return names_.empty(); }

    // "id<TAB>name" per line.
    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
        for (size_t i = 0; i < names_.size(); ++i) out << i << '\t' << names_[i] << '\n';
    }

    static Vocabulary load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
        Vocabulary v;
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected \"id<TAB>name\"");
            int32_t id = std::stoi(line.substr(0, tab));
            std::string name = line.substr(tab + 1);
            if (id != static_cast<int32_t>(v.names_.size()))
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": ids must be dense and ascending");
            v.get_or_add(name);
        }
        return v;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int32_t> index_;
};

}  // namespace rule
