#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace rule {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds from one
// base seed so adding/removing a consumer never shifts another stream.
inline uint64_t mix_seed(uint64_t base, uint64_t stream) {
    uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline size_t uniform_index(Rng& rng, size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
}

inline std::string serialize_rng(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

inline void deserialize_rng(Rng& rng, const std::string& state) {
    std::istringstream is(state);
    is >> rng;
}

// Cycles over 0..n-1 in shuffled order, reshuffling at each wrap.
// Batches therefore sweep epochs even when the batch size does not
// divide n (small rule sets just cycle more often).
class EpochSampler {
public:
    EpochSampler() = default;
    EpochSampler(size_t n, uint64_t seed) : rng_(seed), order_(n) {
        std::iota(order_.begin(), order_.end(), size_t{0});
        std::shuffle(order_.begin(), order_.end(), rng_);
    }

    size_t next() {
        size_t v = order_[pos_++];
        if (pos_ == order_.size()) {
            pos_ = 0;
            std::shuffle(order_.begin(), order_.end(), rng_);
        }
        return v;
    }

    void fill(std::vector<size_t>& out, size_t count) {
        out.resize(count);
        for (size_t i = 0; i < count; ++i) out[i] = next();
    }

    size_t size() const { return order_.size(); }

    std::string save_state() const {
        std::ostringstream os;
        os << pos_;
        for (size_t v : order_) os << ' ' << v;
        os << '|' << rng_;
        return os.str();
    }

    void load_state(const std::string& s) {
        auto bar = s.find('|');
        std::istringstream head(s.substr(0, bar));
        head >> pos_;
        for (size_t& v : order_) head >> v;
        std::istringstream tail(s.substr(bar + 1));
        tail >> rng_;
    }

private:
    Rng rng_;
    std::vector<size_t> order_;
    size_t pos_ = 0;
};

}  // namespace rule
