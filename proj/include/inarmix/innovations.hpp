#ifndef INARMIX_INNOVATIONS_HPP
#define INARMIX_INNOVATIONS_HPP

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace inarmix {

enum class Family { Poisson, NegativeBinomial };

inline const char* family_name(Family f) {
    return f == Family::Poisson ? "poisson" : "nb";
}

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// Innovation distribution in the mean/dispersion parameterization:
/// E = lambda, Var = phi * lambda. phi = 1 is Poisson; phi > 1 selects the
/// negative binomial with size r = lambda/(phi-1) and success p = 1/phi.
/// Under-dispersion (phi < 1) is rejected.
struct InnovationModel {
    Family family = Family::Poisson;
    double lambda = 1.0;
    double phi = 1.0;

    static InnovationModel poisson(double lambda) {
        InnovationModel m{Family::Poisson, lambda, 1.0};
        m.validate();
        return m;
    }

    static InnovationModel negative_binomial(double lambda, double phi) {
        InnovationModel m{Family::NegativeBinomial, lambda, phi};
        m.validate();
        return m;
    }

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::domain_error("InnovationModel: lambda must be positive and finite");
        if (!std::isfinite(phi))
            throw std::domain_error("InnovationModel: phi must be finite");
        if (family == Family::Poisson) {
            if (phi != 1.0)
                throw std::domain_error("InnovationModel: Poisson requires phi = 1");
        } else {
            if (!(phi > 1.0))
                throw std::domain_error("InnovationModel: negative binomial requires phi > 1");
        }
    }

    double mean() const { return lambda; }
    double variance() const { return phi * lambda; }

    /// NB size parameter r = lambda/(phi-1). Only meaningful for phi > 1.
    double nb_size() const { return lambda / (phi - 1.0); }
    /// NB success probability p = 1/phi.
    double nb_prob() const { return 1.0 / phi; }
};

inline double innovation_log_pmf(const InnovationModel& m, int k) {
    if (k < 0) return neg_inf;
    if (m.family == Family::Poisson)
        return k * std::log(m.lambda) - m.lambda - std::lgamma(k + 1.0);
    const double r = m.nb_size();
    const double p = m.nb_prob();
    return std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) +
           r * std::log(p) + k * std::log1p(-p);
}

inline double innovation_pmf(const InnovationModel& m, int k) {
    return std::exp(innovation_log_pmf(m, k));
}

/// Truncation bound for innovation support: at least the observed maximum and
/// mean + 12 conditional-sd, extended until the pmf drops below 1e-14 so that
/// the discarded tail cannot disturb normalization at the 1e-8 level even for
/// small-lambda heavy-tailed cases.
inline int innovation_truncation(const InnovationModel& m, int observed_max = 0) {
    int k = std::max(observed_max,
                     static_cast<int>(std::ceil(m.lambda + 12.0 * std::sqrt(m.variance()))));
    k = std::max(k, 1);
    while (innovation_log_pmf(m, k) > std::log(1e-14) && k < 1000000)
        ++k;
    return k;
}

namespace detail {

/// Poisson draw by cdf inversion; a single uniform and O(mean) arithmetic,
/// much cheaper than constructing std::poisson_distribution per draw for the
/// small means this library works with. Falls back for large means.
inline int sample_poisson(double mean, Rng& rng) {
    if (mean > 12.0) return std::poisson_distribution<int>(mean)(rng);
    const double u = uniform01(rng);
    double p = std::exp(-mean);
    double cum = p;
    int k = 0;
    const int cap = static_cast<int>(mean + 20.0 * std::sqrt(mean) + 25.0);
    while (u > cum && k < cap) {
        ++k;
        p *= mean / k;
        cum += p;
    }
    return k;
}

} // namespace detail

/// Reusable innovation sampler; precomputes the gamma mixing distribution for
/// the negative binomial so repeated draws avoid per-call setup.
class InnovationSampler {
public:
    explicit InnovationSampler(const InnovationModel& m) : model_(m) {
        m.validate();
        if (m.family == Family::NegativeBinomial)
            gamma_ = std::gamma_distribution<double>(m.nb_size(), m.phi - 1.0);
    }

    int operator()(Rng& rng) {
        if (model_.family == Family::Poisson) return detail::sample_poisson(model_.lambda, rng);
        const double rate = gamma_(rng);  // NB as a gamma-Poisson mixture
        return rate > 0.0 ? detail::sample_poisson(rate, rng) : 0;
    }

private:
    InnovationModel model_;
    std::gamma_distribution<double> gamma_;
};

inline int sample_innovation(const InnovationModel& m, Rng& rng) {
    return InnovationSampler(m)(rng);
}

/// pmf table for k = 0..K in both log and linear domain. The linear values
/// are exp of the exact log pmf, so the two views agree to rounding.
struct InnovationTable {
    std::vector<double> logp;
    std::vector<double> p;
};

inline InnovationTable innovation_table(const InnovationModel& m, int K) {
    InnovationTable t;
    t.logp.resize(static_cast<std::size_t>(K) + 1);
    t.p.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const double lp = innovation_log_pmf(m, k);
        t.logp[static_cast<std::size_t>(k)] = lp;
        t.p[static_cast<std::size_t>(k)] = std::exp(lp);
    }
    return t;
}

} // namespace inarmix

#endif
