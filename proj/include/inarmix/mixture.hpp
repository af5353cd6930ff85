#ifndef INARMIX_MIXTURE_HPP
#define INARMIX_MIXTURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "inar.hpp"
#include "nelder_mead.hpp"

namespace inarmix {

struct Component {
    ComponentSpec spec;
    ComponentParams params;
};

/// Finite mixture of INAR(s*) components. Components may differ in lag but
/// share nothing else; weights are kept strictly positive.
struct MixtureModel {
    std::vector<Component> components;
    std::vector<double> weights;

    int order() const { return static_cast<int>(components.size()); }

    void validate() const {
        if (components.empty())
            throw std::invalid_argument("MixtureModel: needs at least one component");
        if (weights.size() != components.size())
            throw std::invalid_argument("MixtureModel: weights/components size mismatch");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::invalid_argument("MixtureModel: weights must be positive");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("MixtureModel: weights must sum to 1");
        for (const auto& c : components) {
            c.spec.validate();
            c.params.validate();
        }
    }

    void normalize_weights() {
        double sum = 0.0;
        for (double w : weights) sum += w;
        for (double& w : weights) w /= sum;
    }
};

/// Posterior component membership probabilities, one row per series.
struct Responsibilities {
    std::size_t n = 0;
    std::size_t G = 0;
    std::vector<double> z;  // row-major n x G

    Responsibilities() = default;
    Responsibilities(std::size_t n_, std::size_t G_) : n(n_), G(G_), z(n_ * G_, 0.0) {}

    double at(std::size_t i, std::size_t g) const { return z[i * G + g]; }
    double& at(std::size_t i, std::size_t g) { return z[i * G + g]; }

    double row_sum(std::size_t i) const {
        double s = 0.0;
        for (std::size_t g = 0; g < G; ++g) s += at(i, g);
        return s;
    }

    std::vector<double> column(std::size_t g) const {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = at(i, g);
        return c;
    }

    /// MAP labels, ties broken toward the lower component index.
    std::vector<int> map_labels() const {
        std::vector<int> lab(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            for (std::size_t g = 1; g < G; ++g)
                if (at(i, g) > at(i, best)) best = static_cast<int>(g);
            lab[i] = best;
        }
        return lab;
    }
};

/// Thrown when a series has zero likelihood under every component, so
/// responsibilities cannot be normalized.
class DegenerateFitError : public std::runtime_error {
public:
    std::size_t series_index;
    int iteration;

    DegenerateFitError(std::size_t series_index_, int iteration_)
        : std::runtime_error("series " + std::to_string(series_index_) +
                             " has zero likelihood under every component" +
                             (iteration_ >= 0 ? " (EM iteration " + std::to_string(iteration_) + ")"
                                              : std::string())),
          series_index(series_index_),
          iteration(iteration_) {}
};

namespace detail {

/// Sufficient view of one series for a fixed lag: run-length encoded startup
/// values (innovation-only factors) and (current, lagged) transition pairs.
/// Likelihood evaluations then cost O(distinct values) instead of O(T).
struct PairCounts {
    std::vector<std::array<int, 3>> trans;  // {x_t, x_lag, count}
    std::vector<std::array<int, 2>> head;   // {value, count}
};

inline PairCounts build_pair_counts(const CountSeries& s, int lag) {
    const int T = s.length();
    std::vector<int> head_vals;
    std::vector<std::array<int, 2>> pair_vals;
    for (int t = 0; t < T; ++t) {
        if (t < lag)
            head_vals.push_back(s[t]);
        else
            pair_vals.push_back({s[t], s[t - lag]});
    }
    PairCounts pc;
    std::sort(head_vals.begin(), head_vals.end());
    for (std::size_t i = 0; i < head_vals.size();) {
        std::size_t j = i;
        while (j < head_vals.size() && head_vals[j] == head_vals[i]) ++j;
        pc.head.push_back({head_vals[i], static_cast<int>(j - i)});
        i = j;
    }
    std::sort(pair_vals.begin(), pair_vals.end());
    for (std::size_t i = 0; i < pair_vals.size();) {
        std::size_t j = i;
        while (j < pair_vals.size() && pair_vals[j] == pair_vals[i]) ++j;
        pc.trans.push_back({pair_vals[i][0], pair_vals[i][1], static_cast<int>(j - i)});
        i = j;
    }
    return pc;
}

/// log P(a | lagged b) by linear-domain convolution of the binomial survivor
/// pmf (recurrence) with a precomputed innovation pmf table. Falls back to
/// log-sum-exp when the linear path underflows, so extreme parameter values
/// met during optimization stay correct.
inline double log_conditional_from_table(int a, int b, double alpha,
                                         const InnovationTable& table) {
    if (b == 0 || alpha == 0.0) return table.logp[static_cast<std::size_t>(a)];
    if (alpha == 1.0) return a >= b ? table.logp[static_cast<std::size_t>(a - b)] : neg_inf;
    const int kmax = std::min(a, b);
    const double log1ma = std::log1p(-alpha);
    if (b * log1ma > -700.0) {
        const double ratio = alpha / (1.0 - alpha);
        double w = std::exp(b * log1ma);  // Binomial(b, alpha) pmf at k = 0
        double sum = 0.0;
        for (int k = 0;; ++k) {
            sum += w * table.p[static_cast<std::size_t>(a - k)];
            if (k == kmax) break;
            w *= ratio * (b - k) / (k + 1.0);
        }
        if (sum > 0.0) return std::log(sum);
    }
    // slow path: all mass below the linear floor
    double mx = neg_inf;
    std::vector<double> terms(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
        terms[static_cast<std::size_t>(k)] =
            log_binomial_pmf(k, b, alpha) + table.logp[static_cast<std::size_t>(a - k)];
        mx = std::max(mx, terms[static_cast<std::size_t>(k)]);
    }
    if (mx == neg_inf) return neg_inf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

/// Conditional log-pmf lookup table over observed values; dense grid for
/// small supports, sparse (only observed pairs) otherwise.
struct CondTable {
    int K = 0;
    bool dense = true;
    std::vector<double> grid;  // (K+1)^2 when dense
    std::unordered_map<long long, double> sparse;

    double at(int a, int b) const {
        if (dense) return grid[static_cast<std::size_t>(a) * (K + 1) + b];
        return sparse.at(static_cast<long long>(a) * (K + 1) + b);
    }
};

class PanelLikelihoodCache {
public:
    explicit PanelLikelihoodCache(const Panel& panel) : panel_(&panel) {
        if (panel.empty())
            throw std::invalid_argument("PanelLikelihoodCache: empty panel");
        max_count_ = panel_max_value(panel);
    }

    const Panel& panel() const { return *panel_; }
    int max_count() const { return max_count_; }

    const std::vector<PairCounts>& for_lag(int lag) {
        auto it = by_lag_.find(lag);
        if (it != by_lag_.end()) return it->second.counts;
        LagData data;
        data.counts.reserve(panel_->size());
        std::vector<std::array<int, 2>> all_pairs;
        for (const auto& s : *panel_) {
            data.counts.push_back(build_pair_counts(s, lag));
            for (const auto& t : data.counts.back().trans)
                all_pairs.push_back({t[0], t[1]});
        }
        std::sort(all_pairs.begin(), all_pairs.end());
        all_pairs.erase(std::unique(all_pairs.begin(), all_pairs.end()), all_pairs.end());
        data.distinct_pairs = std::move(all_pairs);
        return by_lag_.emplace(lag, std::move(data)).first->second.counts;
    }

    const std::vector<std::array<int, 2>>& distinct_pairs(int lag) {
        for_lag(lag);
        return by_lag_.at(lag).distinct_pairs;
    }

private:
    struct LagData {
        std::vector<PairCounts> counts;
        std::vector<std::array<int, 2>> distinct_pairs;
    };
    const Panel* panel_;
    int max_count_ = 0;
    std::map<int, LagData> by_lag_;
};

inline CondTable build_cond_table(PanelLikelihoodCache& cache, int lag,
                                  const ComponentParams& params) {
    const int K = cache.max_count();
    const InnovationTable table = innovation_table(params.innovation, K);
    CondTable ct;
    ct.K = K;
    if (static_cast<long long>(K + 1) * (K + 1) <= (1 << 16)) {
        ct.dense = true;
        ct.grid.resize(static_cast<std::size_t>(K + 1) * (K + 1));
        for (int a = 0; a <= K; ++a)
            for (int b = 0; b <= K; ++b)
                ct.grid[static_cast<std::size_t>(a) * (K + 1) + b] =
                    log_conditional_from_table(a, b, params.alpha, table);
    } else {
        ct.dense = false;
        for (const auto& p : cache.distinct_pairs(lag))
            ct.sparse[static_cast<long long>(p[0]) * (K + 1) + p[1]] =
                log_conditional_from_table(p[0], p[1], params.alpha, table);
    }
    return ct;
}

inline double series_loglik_counts(const PairCounts& pc, const std::vector<double>& log_innov,
                                   const CondTable& cond) {
    double ll = 0.0;
    for (const auto& h : pc.head) ll += h[1] * log_innov[static_cast<std::size_t>(h[0])];
    for (const auto& t : pc.trans) ll += t[2] * cond.at(t[0], t[1]);
    return ll;
}

/// Responsibility-weighted transition/startup counts pooled over the panel;
/// the component M-step objective is evaluated against these so its cost does
/// not grow with the number of series.
struct WeightedCounts {
    int K = 0;
    std::vector<double> head_w;              // dense over value
    std::vector<std::array<int, 2>> pairs;   // distinct (current, lagged)
    std::vector<double> pair_w;
    double total_weight = 0.0;
};

inline WeightedCounts pool_counts(const std::vector<PairCounts>& counts,
                                  const std::vector<double>& weights, int K) {
    WeightedCounts wc;
    wc.K = K;
    wc.head_w.assign(static_cast<std::size_t>(K) + 1, 0.0);
    std::map<std::pair<int, int>, double> acc;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double w = weights[i];
        wc.total_weight += w;
        if (w == 0.0) continue;
        for (const auto& h : counts[i].head)
            wc.head_w[static_cast<std::size_t>(h[0])] += w * h[1];
        for (const auto& t : counts[i].trans) acc[{t[0], t[1]}] += w * t[2];
    }
    wc.pairs.reserve(acc.size());
    wc.pair_w.reserve(acc.size());
    for (const auto& [key, w] : acc) {
        wc.pairs.push_back({key.first, key.second});
        wc.pair_w.push_back(w);
    }
    return wc;
}

inline double weighted_loglik(const WeightedCounts& wc, const ComponentParams& params) {
    const InnovationTable table = innovation_table(params.innovation, wc.K);
    double ll = 0.0;
    for (int v = 0; v <= wc.K; ++v) {
        const double w = wc.head_w[static_cast<std::size_t>(v)];
        if (w > 0.0) ll += w * table.logp[static_cast<std::size_t>(v)];
    }
    if (ll == neg_inf) return neg_inf;
    for (std::size_t j = 0; j < wc.pairs.size(); ++j) {
        const double lc = log_conditional_from_table(wc.pairs[j][0], wc.pairs[j][1],
                                                     params.alpha, table);
        if (lc == neg_inf) return neg_inf;
        ll += wc.pair_w[j] * lc;
    }
    return ll;
}

// optimization happens in an unconstrained transform space:
// alpha through a logit, lambda through log, phi - 1 through log
inline double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

inline std::vector<double> to_transform(const ComponentParams& p) {
    const double a = clamp(p.alpha, 1e-8, 1.0 - 1e-8);
    std::vector<double> v{std::log(a / (1.0 - a)), std::log(p.innovation.lambda)};
    if (p.innovation.family == Family::NegativeBinomial)
        v.push_back(std::log(std::max(p.innovation.phi - 1.0, 1e-8)));
    return v;
}

inline ComponentParams from_transform(const std::vector<double>& v, Family family) {
    ComponentParams p;
    const double t = clamp(v[0], -30.0, 30.0);
    p.alpha = 1.0 / (1.0 + std::exp(-t));
    p.innovation.family = family;
    p.innovation.lambda = std::exp(clamp(v[1], -16.0, 16.0));
    p.innovation.phi = family == Family::NegativeBinomial
                           ? 1.0 + std::exp(clamp(v[2], -16.0, 16.0))
                           : 1.0;
    return p;
}

} // namespace detail

struct EStepResult {
    Responsibilities resp;
    double loglik = neg_inf;
};

namespace detail {

inline EStepResult e_step_cached(PanelLikelihoodCache& cache, const MixtureModel& model,
                                 int iteration) {
    const Panel& panel = cache.panel();
    const std::size_t n = panel.size();
    const std::size_t G = static_cast<std::size_t>(model.order());
    const int K = cache.max_count();

    std::vector<std::vector<double>> log_innov(G);
    std::vector<CondTable> cond(G);
    std::vector<const std::vector<PairCounts>*> counts(G);
    std::vector<double> log_w(G);
    for (std::size_t g = 0; g < G; ++g) {
        const Component& c = model.components[g];
        log_innov[g] = innovation_table(c.params.innovation, K).logp;
        cond[g] = build_cond_table(cache, c.spec.lag, c.params);
        counts[g] = &cache.for_lag(c.spec.lag);
        log_w[g] = std::log(model.weights[g]);
    }

    EStepResult out;
    out.resp = Responsibilities(n, G);
    out.loglik = 0.0;
    std::vector<double> lw(G);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = neg_inf;
        for (std::size_t g = 0; g < G; ++g) {
            lw[g] = log_w[g] + series_loglik_counts((*counts[g])[i], log_innov[g], cond[g]);
            mx = std::max(mx, lw[g]);
        }
        if (mx == neg_inf) throw DegenerateFitError(i, iteration);
        double sum = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const double e = std::exp(lw[g] - mx);
            out.resp.at(i, g) = e;
            sum += e;
        }
        for (std::size_t g = 0; g < G; ++g) out.resp.at(i, g) /= sum;
        out.loglik += mx + std::log(sum);
    }
    return out;
}

} // namespace detail

/// One E-step: responsibilities and the mixture log-likelihood at the given
/// model. Throws DegenerateFitError when some series has zero likelihood
/// under every component.
inline EStepResult e_step(const Panel& panel, const MixtureModel& model) {
    model.validate();
    detail::PanelLikelihoodCache cache(panel);
    return detail::e_step_cached(cache, model, -1);
}

/// Weight M-step: responsibility column means, floored and renormalized so no
/// component collapses to exactly zero weight.
inline std::vector<double> m_step_weights(const Responsibilities& resp,
                                          double floor = 1e-6) {
    if (resp.n == 0) throw std::invalid_argument("m_step_weights: empty responsibilities");
    std::vector<double> w(resp.G, 0.0);
    for (std::size_t i = 0; i < resp.n; ++i)
        for (std::size_t g = 0; g < resp.G; ++g) w[g] += resp.at(i, g);
    double sum = 0.0;
    for (double& x : w) {
        x = std::max(x / resp.n, floor);
        sum += x;
    }
    for (double& x : w) x /= sum;
    return w;
}

struct MStepOptions {
    NelderMeadOptions nm;
    int restarts = 2;      // jittered retries when the first run stalls without converging
    double jitter = 0.4;
};

struct MStepComponentResult {
    ComponentParams params;
    double objective = neg_inf;  // weighted log-likelihood at the returned params
    bool warning = false;        // no improvement found on the pathological path
};

namespace detail {

inline MStepComponentResult maximize_component(const WeightedCounts& wc,
                                               const ComponentParams& start,
                                               const MStepOptions& opts) {
    MStepComponentResult out;
    out.params = start;
    out.objective = weighted_loglik(wc, start);
    if (wc.total_weight <= 1e-12) return out;  // empty component, keep start

    const Family family = start.innovation.family;
    auto objective = [&](const std::vector<double>& v) {
        return -weighted_loglik(wc, from_transform(v, family));
    };
    const std::vector<double> v0 = to_transform(start);
    const double q_start = out.objective;
    const double improve_tol = 1e-8 * (1.0 + std::fabs(q_start));

    bool any_converged = false;
    for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
        std::vector<double> x0 = v0;
        if (attempt > 0)
            for (std::size_t j = 0; j < x0.size(); ++j)
                x0[j] += ((attempt + j) % 2 == 0 ? 1.0 : -1.0) * opts.jitter * attempt;
        const NelderMeadResult res = nelder_mead_minimize(objective, x0, opts.nm);
        any_converged = any_converged || res.converged;
        if (-res.f > out.objective) {
            out.objective = -res.f;
            out.params = from_transform(res.x, family);
        }
        // retries are only for runs that stall at the start without converging
        if (out.objective > q_start + improve_tol || res.converged) break;
    }
    if (out.objective <= q_start + improve_tol && !any_converged) {
        out.params = start;
        out.objective = q_start;
        out.warning = true;
    }
    return out;
}

} // namespace detail

/// Component M-step: responsibility-weighted likelihood maximization over
/// (alpha, lambda[, phi]) by Nelder-Mead in transform space. Never returns
/// parameters scoring below the start point.
inline MStepComponentResult m_step_component(const Panel& panel,
                                             const std::vector<double>& weights,
                                             const ComponentSpec& spec,
                                             const ComponentParams& start,
                                             const MStepOptions& opts = {}) {
    if (weights.size() != panel.size())
        throw std::invalid_argument("m_step_component: one weight per series required");
    spec.validate();
    start.validate();
    if (start.innovation.family != spec.family)
        throw std::invalid_argument("m_step_component: start family differs from spec");
    detail::PanelLikelihoodCache cache(panel);
    const detail::WeightedCounts wc =
        detail::pool_counts(cache.for_lag(spec.lag), weights, cache.max_count());
    return detail::maximize_component(wc, start, opts);
}

enum class StopRule {
    AitkenPrev,     // asymptote gap to the previous iterate must fall in (0, eps)
    AitkenCurrent,  // asymptote gap to the current iterate must fall below eps
};

struct AitkenState {
    bool converged = false;
    double a = std::numeric_limits<double>::quiet_NaN();
    double loglik_inf = std::numeric_limits<double>::quiet_NaN();
};

/// Aitken-accelerated stopping decision from the last three log-likelihoods.
/// Zero progress between the two older iterates counts as converged; an
/// acceleration ratio >= 1 (no finite asymptote) never does.
inline AitkenState aitken_converged(const std::vector<double>& trace, double epsilon,
                                    StopRule rule = StopRule::AitkenPrev) {
    AitkenState st;
    if (trace.size() < 3) return st;
    const double l0 = trace[trace.size() - 3];
    const double l1 = trace[trace.size() - 2];
    const double l2 = trace[trace.size() - 1];
    const double denom = l1 - l0;
    if (std::fabs(denom) <= 1e-12 * (1.0 + std::fabs(l1))) {
        st.converged = true;  // zero progress
        st.loglik_inf = l1;
        return st;
    }
    st.a = (l2 - l1) / denom;
    if (st.a >= 1.0) {
        st.loglik_inf = std::numeric_limits<double>::infinity();
        return st;
    }
    st.loglik_inf = l1 + (l2 - l1) / (1.0 - st.a);
    if (rule == StopRule::AitkenPrev) {
        const double gap = st.loglik_inf - l1;
        st.converged = gap > 0.0 && gap < epsilon;
    } else {
        st.converged = (st.loglik_inf - l2) < epsilon;
    }
    return st;
}

struct EmOptions {
    double epsilon = 0.1;
    int max_iters = 500;
    StopRule stop_rule = StopRule::AitkenPrev;
    double weight_floor = 1e-6;
    MStepOptions mstep;
};

struct FitResult {
    MixtureModel model;
    Responsibilities resp;
    std::vector<int> map_labels;
    std::vector<double> loglik_trace;
    double loglik = neg_inf;
    double bic = neg_inf;
    int iterations = 0;
    bool converged = false;
    bool mstep_warning = false;
};

inline int free_parameter_count(int G, Family family) {
    return (family == Family::Poisson ? 3 : 4) * G - 1;
}

inline int free_parameter_count(const MixtureModel& model) {
    int rho = model.order() - 1;
    for (const auto& c : model.components)
        rho += c.spec.family == Family::Poisson ? 2 : 3;
    return rho;
}

/// BIC in the larger-is-better convention, 2 loglik - rho log(n_obs). n_obs
/// is a floating count of observations (>= 1).
inline double bic(double loglik, int rho, double n_obs) {
    if (!(n_obs >= 1.0)) throw std::domain_error("bic: n_obs must be >= 1");
    return 2.0 * loglik - rho * std::log(n_obs);
}

inline double bic(double loglik, int G, Family family, double n_obs) {
    return bic(loglik, free_parameter_count(G, family), n_obs);
}

/// EM fit of a fixed-structure mixture from the given starting model.
/// Monotone in log-likelihood up to the weight floor and M-step tolerance;
/// stops by Aitken acceleration or at max_iters.
inline FitResult fit_em(const Panel& panel, const MixtureModel& init,
                        const EmOptions& opts = {}) {
    init.validate();
    if (panel.empty()) throw std::invalid_argument("fit_em: empty panel");

    detail::PanelLikelihoodCache cache(panel);
    MixtureModel model = init;
    model.normalize_weights();
    const std::size_t G = static_cast<std::size_t>(model.order());

    FitResult out;
    EStepResult es = detail::e_step_cached(cache, model, 0);
    out.loglik_trace.push_back(es.loglik);

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        model.weights = m_step_weights(es.resp, opts.weight_floor);
        for (std::size_t g = 0; g < G; ++g) {
            Component& c = model.components[g];
            const detail::WeightedCounts wc = detail::pool_counts(
                cache.for_lag(c.spec.lag), es.resp.column(g), cache.max_count());
            const MStepComponentResult ms =
                detail::maximize_component(wc, c.params, opts.mstep);
            c.params = ms.params;
            out.mstep_warning = out.mstep_warning || ms.warning;
        }
        es = detail::e_step_cached(cache, model, iter);
        out.loglik_trace.push_back(es.loglik);
        if (aitken_converged(out.loglik_trace, opts.epsilon, opts.stop_rule).converged) {
            out.converged = true;
            break;
        }
    }

    out.model = std::move(model);
    out.resp = std::move(es.resp);
    out.map_labels = out.resp.map_labels();
    out.loglik = out.loglik_trace.back();
    out.iterations = static_cast<int>(out.loglik_trace.size()) - 1;
    out.bic = bic(out.loglik, free_parameter_count(out.model),
                  static_cast<double>(total_observations(panel)));
    return out;
}

} // namespace inarmix

#endif
