#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "rule/grounding.hpp"
#include "rule/io.hpp"
#include "rule/random.hpp"

namespace rule {

// Grounding scorer: input width |L| -> one ReLU hidden layer -> scalar.
// Inputs are sparse (most rules are unactivated for a given candidate), so
// the forward pass only touches activated rows of W1.
class GroundingMlp {
public:
    GroundingMlp() = default;

    GroundingMlp(size_t in_width, size_t hidden, Rng& rng)
        : in_(in_width), hidden_(hidden), w1_(in_width * hidden), b1_(hidden, 0.0),
          w2_(hidden), b2_(0.0) {
        double lim1 = std::sqrt(6.0 / static_cast<double>(in_width));
        double lim2 = std::sqrt(6.0 / static_cast<double>(hidden));
        std::uniform_real_distribution<double> d1(-lim1, lim1), d2(-lim2, lim2);
        for (double& w : w1_) w = d1(rng);
        for (double& w : w2_) w = d2(rng);
    }

    size_t in_width() const { return in_; }
    size_t hidden_width() const { return hidden_; }

    double forward(const SparseEncoding& x, std::vector<double>* hidden_pre = nullptr) const {
        std::vector<double> local;
        std::vector<double>& h = hidden_pre ? *hidden_pre : local;
        h = b1_;
        for (const auto& [i, v] : x) {
            if (static_cast<size_t>(i) >= in_)
                throw std::invalid_argument("GroundingMlp: encoding index out of range");
            const double* row = w1_.data() + static_cast<size_t>(i) * hidden_;
            for (size_t j = 0; j < hidden_; ++j) h[j] += v * row[j];
        }
        double out = b2_;
        for (size_t j = 0; j < hidden_; ++j)
            if (h[j] > 0) out += w2_[j] * h[j];
        return out;
    }

    // Score shared by every zero-support candidate (bias path only).
    double zero_input_score() const { return forward({}); }

    struct Grad {
        std::vector<double> w1, b1, w2;
        double b2 = 0.0;

        void reset(const GroundingMlp& mlp) {
            w1.assign(mlp.w1_.size(), 0.0);
            b1.assign(mlp.b1_.size(), 0.0);
            w2.assign(mlp.w2_.size(), 0.0);
            b2 = 0.0;
        }
    };

    // Accumulates d(loss)/d(params) given d(loss)/d(score); hidden_pre must
    // come from the matching forward call.
    void backward(const SparseEncoding& x, const std::vector<double>& hidden_pre, double dscore,
                  Grad& g) const {
        g.b2 += dscore;
        std::vector<double> dh(hidden_);
        for (size_t j = 0; j < hidden_; ++j) {
            if (hidden_pre[j] > 0) {
                g.w2[j] += dscore * hidden_pre[j];
                dh[j] = dscore * w2_[j];
            } else {
                dh[j] = 0.0;
            }
            g.b1[j] += dh[j];
        }
        for (const auto& [i, v] : x) {
            double* row = g.w1.data() + static_cast<size_t>(i) * hidden_;
            for (size_t j = 0; j < hidden_; ++j) row[j] += v * dh[j];
        }
    }

    void adam_step(const Grad& g, double lr, uint64_t t, std::vector<double>& m,
                   std::vector<double>& v) {
        const double b1 = 0.9, b2c = 0.999, eps = 1e-8;
        double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        double c2 = 1.0 - std::pow(b2c, static_cast<double>(t));
        size_t n = param_count();
        if (m.size() != n) m.assign(n, 0.0);
        if (v.size() != n) v.assign(n, 0.0);
        size_t at = 0;
        auto upd = [&](double* p, const double* gr, size_t cnt) {
            for (size_t i = 0; i < cnt; ++i, ++at) {
                m[at] = b1 * m[at] + (1 - b1) * gr[i];
                v[at] = b2c * v[at] + (1 - b2c) * gr[i] * gr[i];
                p[i] -= lr * (m[at] / c1) / (std::sqrt(v[at] / c2) + eps);
            }
        };
        upd(w1_.data(), g.w1.data(), w1_.size());
        upd(b1_.data(), g.b1.data(), b1_.size());
        upd(w2_.data(), g.w2.data(), w2_.size());
        upd(&b2_, &g.b2, 1);
    }

    size_t param_count() const { return w1_.size() + b1_.size() + w2_.size() + 1; }

    Section to_section(uint64_t rule_fingerprint) const {
        BinaryWriter w;
        w.put<uint32_t>(static_cast<uint32_t>(in_));
        w.put<uint32_t>(static_cast<uint32_t>(hidden_));
        w.put<uint64_t>(rule_fingerprint);
        w.put_f32_array(w1_.data(), w1_.size());
        w.put_f32_array(b1_.data(), b1_.size());
        w.put_f32_array(w2_.data(), w2_.size());
        w.put_f32_array(&b2_, 1);
        return Section{kSectionGroundingMlp, w.bytes()};
    }

    // Fingerprint mismatch against the supplied rule set is an error: the
    // MLP's input slots are meaningless under any other rule ordering.
    static GroundingMlp from_section(const Section& s, uint64_t expected_fingerprint) {
        BinaryReader r(s.payload.data(), s.payload.size());
        GroundingMlp mlp;
        mlp.in_ = r.get<uint32_t>();
        mlp.hidden_ = r.get<uint32_t>();
        uint64_t fp = r.get<uint64_t>();
        if (fp != expected_fingerprint)
            throw std::runtime_error("grounding model was trained on a different rule set "
                                     "(fingerprint mismatch)");
        mlp.w1_.resize(mlp.in_ * mlp.hidden_);
        mlp.b1_.resize(mlp.hidden_);
        mlp.w2_.resize(mlp.hidden_);
        r.get_f32_array(mlp.w1_.data(), mlp.w1_.size());
        r.get_f32_array(mlp.b1_.data(), mlp.b1_.size());
        r.get_f32_array(mlp.w2_.data(), mlp.w2_.size());
        r.get_f32_array(&mlp.b2_, 1);
        return mlp;
    }

    // Direct parameter access for hand-built fixtures.
    std::vector<double>& w1() { return w1_; }
    std::vector<double>& b1() { return b1_; }
    std::vector<double>& w2() { return w2_; }
    double& b2() { return b2_; }

private:
    size_t in_ = 0;
    size_t hidden_ = 0;
    std::vector<double> w1_;  // in x hidden, row per input slot
    std::vector<double> b1_;
    std::vector<double> w2_;
    double b2_ = 0.0;
};

}  // namespace rule
