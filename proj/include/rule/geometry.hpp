#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace rule {

enum class Norm { L1, L2 };

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Canonical representative in [-pi, pi).
inline double wrap_angle(double x) {
    double w = x - kTwoPi * std::floor((x + std::numbers::pi) / kTwoPi);
    // floor rounding can land exactly on pi for inputs just below a period edge
    if (w >= std::numbers::pi) w -= kTwoPi;
    return w;
}

// Entity embedding in C^k, split real/imaginary.
struct ComplexVector {
    std::vector<double> re;
    std::vector<double> im;

    ComplexVector() = default;
    explicit ComplexVector(size_t k) : re(k, 0.0), im(k, 0.0) {}
    ComplexVector(std::vector<double> r, std::vector<double> i)
        : re(std::move(r)), im(std::move(i)) {
        if (re.size() != im.size())
            throw std::invalid_argument("ComplexVector: re/im length mismatch");
    }

    size_t dim() const { return re.size(); }
};

// Relation or rule phases; unit modulus per dimension so only the angle
// is stored.
struct AngleVector {
    std::vector<double> theta;

    AngleVector() = default;
    explicit AngleVector(size_t k) : theta(k, 0.0) {}
    explicit AngleVector(std::vector<double> t) : theta(std::move(t)) {}

    size_t dim() const { return theta.size(); }
};

// Per-position rule angles R = [R^1, ..., R^l] for the order-aware variant.
struct PositionalRuleAngles {
    std::vector<AngleVector> per_position;

    size_t length() const { return per_position.size(); }
};

namespace detail {

inline double finish_norm(double acc, Norm norm) {
    return norm == Norm::L1 ? acc : std::sqrt(acc);
}

// || h.r - t || on raw arrays; cos_t/sin_t are the precomputed rotation.
inline double rotate_distance_kernel(const double* h_re, const double* h_im,
                                     const double* cos_t, const double* sin_t,
                                     const double* t_re, const double* t_im, size_t k,
                                     Norm norm) {
    double acc = 0.0;
    for (size_t j = 0; j < k; ++j) {
        double x = h_re[j] * cos_t[j] - h_im[j] * sin_t[j] - t_re[j];
        double y = h_re[j] * sin_t[j] + h_im[j] * cos_t[j] - t_im[j];
        double m2 = x * x + y * y;
        acc += norm == Norm::L1 ? std::sqrt(m2) : m2;
    }
    return finish_norm(acc, norm);
}

inline double transe_distance_kernel(const double* h, const double* r, const double* t,
                                     size_t k, Norm norm) {
    double acc = 0.0;
    for (size_t j = 0; j < k; ++j) {
        double x = h[j] + r[j] - t[j];
        acc += norm == Norm::L1 ? std::fabs(x) : x * x;
    }
    return finish_norm(acc, norm);
}

// Residual of a relation chain against its head, one dimension at a time:
// sum of body angles (optionally position-weighted) plus the rule angle,
// minus the head angle. `periodic` wraps the residual to [-pi, pi).
struct ChainResidual {
    std::span<const double* const> body;   // l pointers, k doubles each
    const double* rule = nullptr;          // k, or l*k when positional
    const double* head = nullptr;          // k
    size_t k = 0;
    bool positional = false;
    bool periodic = true;

    double at(size_t j) const {
        double s = 0.0;
        if (positional) {
            for (size_t i = 0; i < body.size(); ++i) s += body[i][j] * rule[i * k + j];
        } else {
            for (const double* b : body) s += b[j];
            s += rule[j];
        }
        s -= head[j];
        return periodic ? wrap_angle(s) : s;
    }
};

inline double chain_distance(const ChainResidual& res, Norm norm) {
    double acc = 0.0;
    for (size_t j = 0; j < res.k; ++j) {
        double w = res.at(j);
        acc += norm == Norm::L1 ? std::fabs(w) : w * w;
    }
    return finish_norm(acc, norm);
}

}  // namespace detail

// Eq.-style RotatE distance ||h.r - t||; L1 sums per-dimension complex
// moduli, L2 is the complex 2-norm.
inline double rotate_distance(const ComplexVector& h, const AngleVector& r,
                              const ComplexVector& t, Norm norm = Norm::L1) {
    size_t k = h.dim();
    if (r.dim() != k || t.dim() != k)
        throw std::invalid_argument("rotate_distance: dimension mismatch");
    std::vector<double> c(k), s(k);
    for (size_t j = 0; j < k; ++j) {
        c[j] = std::cos(r.theta[j]);
        s[j] = std::sin(r.theta[j]);
    }
    return detail::rotate_distance_kernel(h.re.data(), h.im.data(), c.data(), s.data(),
                                          t.re.data(), t.im.data(), k, norm);
}

// ||h + r - t|| on the real parts; imaginary parts are unused.
inline double transe_distance(const ComplexVector& h, const AngleVector& r,
                              const ComplexVector& t, Norm norm = Norm::L1) {
    size_t k = h.dim();
    if (r.dim() != k || t.dim() != k)
        throw std::invalid_argument("transe_distance: dimension mismatch");
    return detail::transe_distance_kernel(h.re.data(), r.theta.data(), t.re.data(), k, norm);
}

// || wrap(sum_i g(r_i) + g(R) - g(r_head)) ||. Wrapping is applied to the
// per-dimension difference before the norm so equivalent rotations score
// identically.
inline double rule_distance(const std::vector<AngleVector>& body, const AngleVector& head,
                            const AngleVector& rule_angle, Norm norm = Norm::L1) {
    if (body.empty()) throw std::invalid_argument("rule_distance: empty body");
    size_t k = head.dim();
    if (rule_angle.dim() != k) throw std::invalid_argument("rule_distance: dimension mismatch");
    std::vector<const double*> ptrs;
    ptrs.reserve(body.size());
    for (const auto& b : body) {
        if (b.dim() != k) throw std::invalid_argument("rule_distance: dimension mismatch");
        ptrs.push_back(b.theta.data());
    }
    detail::ChainResidual res{std::span<const double* const>(ptrs), rule_angle.theta.data(),
                              head.theta.data(), k, /*positional=*/false, /*periodic=*/true};
    return detail::chain_distance(res, norm);
}

// Position-aware variant: || wrap(sum_j g(r_j) * g(R^j) - g(r_head)) ||
// with an element-wise product inside the sum. Not permutation-invariant.
inline double rule_distance_positional(const std::vector<AngleVector>& body,
                                       const AngleVector& head,
                                       const PositionalRuleAngles& rule_angles,
                                       Norm norm = Norm::L1) {
    if (body.empty()) throw std::invalid_argument("rule_distance_positional: empty body");
    if (rule_angles.length() != body.size())
        throw std::invalid_argument("rule_distance_positional: rule/body length mismatch");
    size_t k = head.dim();
    std::vector<const double*> ptrs;
    std::vector<double> rule_flat;
    rule_flat.reserve(body.size() * k);
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i].dim() != k || rule_angles.per_position[i].dim() != k)
            throw std::invalid_argument("rule_distance_positional: dimension mismatch");
        ptrs.push_back(body[i].theta.data());
        const auto& rp = rule_angles.per_position[i].theta;
        rule_flat.insert(rule_flat.end(), rp.begin(), rp.end());
    }
    detail::ChainResidual res{std::span<const double* const>(ptrs), rule_flat.data(),
                              head.theta.data(), k, /*positional=*/true, /*periodic=*/true};
    return detail::chain_distance(res, norm);
}

}  // namespace rule
