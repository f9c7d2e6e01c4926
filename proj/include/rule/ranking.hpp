#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rule {

// Expected rank of the true answer over uniformly random orderings of
// score ties, in closed form:
//   rank = 1 + #{better} + #{tied non-true}/2.
// Masked entities are excluded from the comparison entirely.
inline double expected_rank(std::span<const double> scores, size_t true_index,
                            const std::vector<uint8_t>* filter_mask = nullptr) {
    if (true_index >= scores.size()) throw std::out_of_range("expected_rank: bad true index");
    if (filter_mask && (*filter_mask)[true_index])
        throw std::invalid_argument("expected_rank: true answer is masked");
    double s = scores[true_index];
    size_t better = 0, tied = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (i == true_index) continue;
        if (filter_mask && (*filter_mask)[i]) continue;
        if (scores[i] > s)
            ++better;
        else if (scores[i] == s)
            ++tied;
    }
    return 1.0 + static_cast<double>(better) + static_cast<double>(tied) / 2.0;
}

struct EvalReport {
    double mrr = 0.0;
    double hits1 = 0.0;   // fractions in [0, 1]
    double hits3 = 0.0;
    double hits10 = 0.0;
    size_t n_queries = 0;
    std::vector<double> ranks;  // kept only when requested

    void add_rank(double rank, bool keep_rank) {
        mrr += 1.0 / rank;
        hits1 += rank <= 1.0 ? 1.0 : 0.0;
        hits3 += rank <= 3.0 ? 1.0 : 0.0;
        hits10 += rank <= 10.0 ? 1.0 : 0.0;
        ++n_queries;
        if (keep_rank) ranks.push_back(rank);
    }

    void finalize() {
        if (n_queries == 0) return;
        double n = static_cast<double>(n_queries);
        mrr /= n;
        hits1 /= n;
        hits3 /= n;
        hits10 /= n;
    }

    std::string to_text() const {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "queries %zu  MRR %.4f  H@1 %.1f%%  H@3 %.1f%%  H@10 %.1f%%", n_queries,
                      mrr, hits1 * 100.0, hits3 * 100.0, hits10 * 100.0);
        return buf;
    }
};

}  // namespace rule
