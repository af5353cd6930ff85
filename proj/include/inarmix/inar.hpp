#ifndef INARMIX_INAR_HPP
#define INARMIX_INAR_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "innovations.hpp"
#include "rng.hpp"
#include "series.hpp"

namespace inarmix {

/// Structural part of an INAR(s*) component: the single active lag s >= 1 and
/// the innovation family. X_t = alpha o X_{t-s} + eps_t.
struct ComponentSpec {
    int lag = 1;
    Family family = Family::Poisson;

    void validate() const {
        if (lag < 1) throw std::domain_error("ComponentSpec: lag must be >= 1");
    }

    bool operator==(const ComponentSpec& o) const {
        return lag == o.lag && family == o.family;
    }
};

/// Continuous parameters of one component: survival probability alpha of the
/// binomial thinning and the innovation law.
struct ComponentParams {
    double alpha = 0.5;
    InnovationModel innovation;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0) || !std::isfinite(alpha))
            throw std::domain_error("ComponentParams: alpha must lie in [0, 1]");
        innovation.validate();
        if (innovation.family != Family::Poisson && innovation.family != Family::NegativeBinomial)
            throw std::domain_error("ComponentParams: unknown innovation family");
    }

    /// Stationary mean lambda * (1 - alpha)^-1 of the INAR recursion.
    double stationary_mean() const { return innovation.lambda / (1.0 - alpha); }
};

/// Binomial thinning alpha o x: sum of x independent Bernoulli(alpha) draws.
inline int binomial_thin(int x, double alpha, Rng& rng) {
    if (x < 0) throw std::domain_error("binomial_thin: x must be non-negative");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::domain_error("binomial_thin: alpha must lie in [0, 1]");
    if (x == 0 || alpha == 0.0) return 0;
    if (alpha == 1.0) return x;
    int n = 0;
    for (int i = 0; i < x; ++i)
        if (uniform01(rng) < alpha) ++n;
    return n;
}

namespace detail {

inline double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log_binomial_pmf(int k, int n, double alpha) {
    if (k < 0 || k > n) return neg_inf;
    if (alpha == 0.0) return k == 0 ? 0.0 : neg_inf;
    if (alpha == 1.0) return k == n ? 0.0 : neg_inf;
    return log_choose(n, k) + k * std::log(alpha) + (n - k) * std::log1p(-alpha);
}

/// log(sum_i exp(v_i)) over the first m entries, stable under large negative
/// magnitudes; returns -inf when every term is -inf.
inline double log_sum_exp(const double* v, int m) {
    double mx = neg_inf;
    for (int i = 0; i < m; ++i) mx = std::max(mx, v[i]);
    if (mx == neg_inf) return neg_inf;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += std::exp(v[i] - mx);
    return mx + std::log(s);
}

} // namespace detail

/// log P(X_t = x_t | X_{t-s} = x_lag): convolution of a Binomial(x_lag, alpha)
/// survivor count with the innovation pmf, accumulated with log-sum-exp.
inline double conditional_log_pmf(int x_t, int x_lag, const ComponentParams& params) {
    if (x_t < 0 || x_lag < 0)
        throw std::domain_error("conditional_log_pmf: counts must be non-negative");
    params.validate();
    const int kmax = std::min(x_t, x_lag);
    std::vector<double> terms(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k)
        terms[static_cast<std::size_t>(k)] =
            detail::log_binomial_pmf(k, x_lag, params.alpha) +
            innovation_log_pmf(params.innovation, x_t - k);
    return detail::log_sum_exp(terms.data(), kmax + 1);
}

inline double conditional_pmf(int x_t, int x_lag, const ComponentParams& params) {
    return std::exp(conditional_log_pmf(x_t, x_lag, params));
}

/// Log-likelihood of one series under a single INAR(s*) component. The first
/// s observations (all of them when T <= s) are treated as innovation-only
/// draws; later ones condition on the value s steps back. Returns -inf when
/// any factor has zero probability.
inline double series_loglik(const CountSeries& series, const ComponentSpec& spec,
                            const ComponentParams& params) {
    spec.validate();
    params.validate();
    const int T = series.length();
    const int s = spec.lag;
    double ll = 0.0;
    for (int t = 0; t < T; ++t) {
        const double term = (t < s)
                                ? innovation_log_pmf(params.innovation, series[t])
                                : conditional_log_pmf(series[t], series[t - s], params);
        if (term == neg_inf) return neg_inf;
        ll += term;
    }
    return ll;
}

/// Simulate a length-T path. The first s values are i.i.d. innovations, the
/// rest follow the thinning recursion; matches the likelihood's treatment of
/// the startup segment.
inline CountSeries simulate_inar(const ComponentSpec& spec, const ComponentParams& params,
                                 int T, Rng& rng) {
    spec.validate();
    params.validate();
    if (T < 1) throw std::domain_error("simulate_inar: T must be >= 1");
    std::vector<int> x(static_cast<std::size_t>(T));
    const int s = spec.lag;
    InnovationSampler innovate(params.innovation);
    for (int t = 0; t < T; ++t) {
        int v = innovate(rng);
        if (t >= s) v += binomial_thin(x[static_cast<std::size_t>(t - s)], params.alpha, rng);
        x[static_cast<std::size_t>(t)] = v;
    }
    return CountSeries(std::move(x));
}

} // namespace inarmix

#endif
