#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace rule {

// How KGE and grounding scores are combined per query.
//   RawSum:     s_t + beta * s_g                      (main-text form)
//   Normalized: beta * s_g_hat + (1 - beta) * s_t,    (reported protocol)
// where s_g_hat is s_g affinely mapped so its min/max match the query's
// KGE min/max; a constant s_g maps to the KGE midpoint.
enum class ScoreMode : uint8_t { RawSum = 0, Normalized = 1 };

inline std::vector<double> integrated_score(std::span<const double> kge_scores,
                                            std::span<const double> grounding_scores, double beta,
                                            ScoreMode mode,
                                            const std::vector<uint8_t>* filter_mask = nullptr) {
    if (kge_scores.size() != grounding_scores.size())
        throw std::invalid_argument("integrated_score: length mismatch");
    size_t n = kge_scores.size();
    std::vector<double> out(n);
    if (mode == ScoreMode::RawSum) {
        for (size_t i = 0; i < n; ++i) out[i] = kge_scores[i] + beta * grounding_scores[i];
        return out;
    }
    // min/max over the candidates actually ranked
    double t_min = std::numeric_limits<double>::infinity(), t_max = -t_min;
    double g_min = t_min, g_max = -t_min;
    for (size_t i = 0; i < n; ++i) {
        if (filter_mask && (*filter_mask)[i]) continue;
        t_min = std::min(t_min, kge_scores[i]);
        t_max = std::max(t_max, kge_scores[i]);
        g_min = std::min(g_min, grounding_scores[i]);
        g_max = std::max(g_max, grounding_scores[i]);
    }
    double g_span = g_max - g_min;
    double t_mid = 0.5 * (t_min + t_max);
    for (size_t i = 0; i < n; ++i) {
        double ghat = g_span > 0.0
                          ? t_min + (grounding_scores[i] - g_min) / g_span * (t_max - t_min)
                          : t_mid;
        out[i] = beta * ghat + (1.0 - beta) * kge_scores[i];
    }
    return out;
}

}  // namespace rule
