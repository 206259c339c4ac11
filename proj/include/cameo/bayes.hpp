#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace cameo {

// Beta prior on the proportion of positive deltas.
struct PriorConfig {
    double alpha = 0.5;
    double beta = 0.5;
};

// Beta(a, b) posterior, a = alpha + x, b = beta + n - x.
struct PosteriorParams {
    double a = 0.0;
    double b = 0.0;
};

// Pair passes when P(pi > pi_threshold) >= confidence.
struct CriterionConfig {
    double pi_threshold = 0.9;
    double confidence = 0.9;
};

inline PosteriorParams posterior(std::size_t x, std::size_t n, const PriorConfig& prior) {
    if (x > n) throw std::invalid_argument("posterior: x exceeds n");
    if (!(prior.alpha > 0.0) || !(prior.beta > 0.0))
        throw std::invalid_argument("posterior: prior parameters must be positive");
    return {prior.alpha + static_cast<double>(x),
            prior.beta + static_cast<double>(n - x)};
}

namespace detail {

// Continued fraction for the incomplete beta function, modified Lentz
// method. Converges rapidly for z < (a+1)/(a+b+2).
inline double inc_beta_cf(double a, double b, double z) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * z / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * z / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * z / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

// z^a (1-z)^b Gamma(a+b) / (Gamma(a) Gamma(b)), via log-gamma so large
// shape parameters do not overflow.
inline double inc_beta_prefactor(double a, double b, double z) {
    return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(z) + b * std::log1p(-z));
}

}  // namespace detail

// Regularized incomplete beta function I_z(a, b): the Beta(a, b) CDF at z.
// Absolute error <= 1e-10 over the supported domain. The symmetry
// I_z(a,b) = 1 - I_{1-z}(b,a) keeps the continued fraction in its fast
// region when z > (a+1)/(a+b+2).
inline double reg_inc_beta(double z, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("reg_inc_beta: shape parameters must be positive");
    if (!(z >= 0.0) || !(z <= 1.0))
        throw std::domain_error("reg_inc_beta: z outside [0,1]");
    if (z == 0.0) return 0.0;
    if (z == 1.0) return 1.0;
    if (z <= (a + 1.0) / (a + b + 2.0))
        return detail::inc_beta_prefactor(a, b, z) * detail::inc_beta_cf(a, b, z) / a;
    return 1.0 - detail::inc_beta_prefactor(b, a, 1.0 - z) *
                     detail::inc_beta_cf(b, a, 1.0 - z) / b;
}

// Posterior tail mass P(pi > threshold) = 1 - I_threshold(a, b),
// evaluated as I_{1-threshold}(b, a) so tails far below machine epsilon
// stay positive instead of cancelling to zero.
inline double prob_pi_exceeds(double threshold, const PosteriorParams& post) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw std::domain_error("prob_pi_exceeds: threshold outside (0,1)");
    return reg_inc_beta(1.0 - threshold, post.b, post.a);
}

// Filter 1. The boundary passes: a tail mass exactly at the confidence
// level counts.
inline bool passes_filter1(std::size_t x, std::size_t n, const PriorConfig& prior = {},
                           const CriterionConfig& crit = {}) {
    return prob_pi_exceeds(crit.pi_threshold, posterior(x, n, prior)) >= crit.confidence;
}

}  // namespace cameo
