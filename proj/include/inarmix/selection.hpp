#ifndef INARMIX_SELECTION_HPP
#define INARMIX_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "init.hpp"
#include "mixture.hpp"

namespace inarmix {

/// Candidate model structure: count_low components at the smaller lag and
/// count_high at the larger one, all sharing the innovation family.
struct CandidateStructure {
    int count_low = 0;
    int count_high = 0;
    int lag_low = 1;
    int lag_high = 2;
    Family family = Family::Poisson;

    int order() const { return count_low + count_high; }

    std::vector<ComponentSpec> specs() const {
        std::vector<ComponentSpec> out;
        for (int i = 0; i < count_low; ++i) out.push_back({lag_low, family});
        for (int i = 0; i < count_high; ++i) out.push_back({lag_high, family});
        return out;
    }

    std::string label() const {
        std::string s;
        if (count_low > 0)
            s += std::to_string(count_low) + "xINAR(" + std::to_string(lag_low) + "*)";
        if (count_high > 0) {
            if (!s.empty()) s += "+";
            s += std::to_string(count_high) + "xINAR(" + std::to_string(lag_high) + "*)";
        }
        return s;
    }

    bool operator==(const CandidateStructure& o) const {
        return count_low == o.count_low && count_high == o.count_high &&
               lag_low == o.lag_low && lag_high == o.lag_high && family == o.family;
    }
};

struct ModelGrid {
    int lag_low = 1;
    int lag_high = 2;
    int G_min = 1;
    int G_max = 2;
    enum class HRule { ZeroOne, Full } h_rule = HRule::ZeroOne;
    Family family = Family::Poisson;

    void validate() const {
        if (lag_low < 1 || lag_high <= lag_low)
            throw std::domain_error("ModelGrid: lags must satisfy 1 <= low < high");
        if (G_min < 1 || G_max < G_min)
            throw std::domain_error("ModelGrid: G range must satisfy 1 <= min <= max");
    }
};

/// Candidate structures in ascending (G, count_high) order. Under the
/// default rule at most one component sits at the larger lag; the full rule
/// allows any split.
inline std::vector<CandidateStructure> enumerate_models(const ModelGrid& grid) {
    grid.validate();
    std::vector<CandidateStructure> out;
    for (int G = grid.G_min; G <= grid.G_max; ++G) {
        const int h_max = grid.h_rule == ModelGrid::HRule::ZeroOne ? std::min(1, G) : G;
        for (int H = 0; H <= h_max; ++H)
            out.push_back({G - H, H, grid.lag_low, grid.lag_high, grid.family});
    }
    return out;
}

struct CandidateRow {
    CandidateStructure structure;
    bool ok = false;
    std::string error;
    double loglik = neg_inf;
    double bic = neg_inf;
    int rho = 0;
    int iterations = 0;
    bool converged = false;
    std::optional<FitResult> fit;
};

struct SearchOptions {
    EmOptions em;
    InitConfig init;
};

class AllCandidatesFailedError : public std::runtime_error {
public:
    explicit AllCandidatesFailedError(const std::string& what) : std::runtime_error(what) {}
};

struct SearchResult {
    std::vector<CandidateRow> rows;
    int best_index = -1;

    const CandidateRow& best_row() const { return rows[static_cast<std::size_t>(best_index)]; }
    const FitResult& best_fit() const { return *best_row().fit; }
};

/// Fit every candidate in the grid and pick the best by BIC (ties toward
/// fewer free parameters, then enumeration order). Growing G within a fixed
/// count_high reuses the previous fit as a warm start; the smallest G of each
/// family initializes from scratch. Candidates that fail are recorded and
/// skipped; if all fail the search throws.
inline SearchResult model_search(const Panel& panel, const ModelGrid& grid,
                                 const SearchOptions& opts, Rng& rng) {
    const std::vector<CandidateStructure> cands = enumerate_models(grid);
    const std::uint64_t base = rng();

    SearchResult res;
    res.rows.resize(cands.size());
    std::map<std::pair<int, int>, std::size_t> by_counts;

    for (std::size_t idx = 0; idx < cands.size(); ++idx) {
        CandidateRow& row = res.rows[idx];
        row.structure = cands[idx];
        by_counts[{cands[idx].count_low, cands[idx].count_high}] = idx;
        try {
            MixtureModel start;
            bool warm = false;
            if (cands[idx].count_low >= 1) {
                // previous fit of the same count_high family, one fewer low-lag component
                auto it = by_counts.find({cands[idx].count_low - 1, cands[idx].count_high});
                if (it != by_counts.end() && res.rows[it->second].ok) {
                    start = augment_model(*res.rows[it->second].fit, panel,
                                          {cands[idx].lag_low, cands[idx].family}, opts.init);
                    warm = true;
                }
            }
            if (!warm) {
                Rng cand_rng = make_rng(base, static_cast<std::uint64_t>(idx));
                start = initial_model(panel, cands[idx].specs(), opts.init, cand_rng);
            }
            FitResult fit = fit_em(panel, start, opts.em);
            row.ok = true;
            row.loglik = fit.loglik;
            row.bic = fit.bic;
            row.rho = free_parameter_count(fit.model);
            row.iterations = fit.iterations;
            row.converged = fit.converged;
            row.fit = std::move(fit);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    }

    for (std::size_t idx = 0; idx < res.rows.size(); ++idx) {
        const CandidateRow& row = res.rows[idx];
        if (!row.ok) continue;
        if (res.best_index < 0) {
            res.best_index = static_cast<int>(idx);
            continue;
        }
        const CandidateRow& best = res.rows[static_cast<std::size_t>(res.best_index)];
        if (row.bic > best.bic || (row.bic == best.bic && row.rho < best.rho))
            res.best_index = static_cast<int>(idx);
    }
    if (res.best_index < 0)
        throw AllCandidatesFailedError("model_search: every candidate fit failed (first error: " +
                                       (res.rows.empty() ? std::string("no candidates")
                                                         : res.rows.front().error) +
                                       ")");
    return res;
}

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace detail

struct AcfReport {
    int max_lag = 0;
    std::vector<std::vector<double>> acf;  // [series][lag-1]
    std::vector<bool> constant;            // flagged series, excluded from the medians
    std::vector<double> median_abs_acf;    // per lag over non-constant series
    std::pair<int, int> suggested_lags{1, 2};
};

/// Per-series autocorrelations up to max_lag plus the per-lag median |acf|
/// over non-constant series; the two lags with the largest medians (ties to
/// the smaller lag) are suggested as the search grid.
inline AcfReport acf_panel(const Panel& panel, int max_lag) {
    if (panel.empty()) throw std::invalid_argument("acf_panel: empty panel");
    if (max_lag < 2) throw std::domain_error("acf_panel: max_lag must be >= 2");
    AcfReport rep;
    rep.max_lag = max_lag;
    rep.acf.resize(panel.size());
    rep.constant.resize(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) {
        rep.constant[i] = panel[i].constant();
        rep.acf[i].resize(static_cast<std::size_t>(max_lag));
        for (int lag = 1; lag <= max_lag; ++lag)
            rep.acf[i][static_cast<std::size_t>(lag - 1)] = autocorrelation(panel[i], lag);
    }
    rep.median_abs_acf.resize(static_cast<std::size_t>(max_lag), 0.0);
    for (int lag = 1; lag <= max_lag; ++lag) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < panel.size(); ++i)
            if (!rep.constant[i])
                vals.push_back(std::fabs(rep.acf[i][static_cast<std::size_t>(lag - 1)]));
        rep.median_abs_acf[static_cast<std::size_t>(lag - 1)] = detail::median(std::move(vals));
    }
    std::vector<int> order(static_cast<std::size_t>(max_lag));
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rep.median_abs_acf[static_cast<std::size_t>(a - 1)] >
               rep.median_abs_acf[static_cast<std::size_t>(b - 1)];
    });
    int i = order[0], j = order[1];
    rep.suggested_lags = {std::min(i, j), std::max(i, j)};
    return rep;
}

struct DispersionReport {
    std::vector<double> mean, variance, ratio;  // per series; ratio 0 when the mean is 0
    double median_ratio = 0.0;
    double threshold = 1.2;
    bool overdispersed = false;
};

/// Equidispersion screen: per-series variance/mean ratios and their median
/// against the threshold. Poisson innovations put the stationary ratio at 1;
/// overdispersed innovations push it above.
inline DispersionReport dispersion_diagnostic(const Panel& panel, double threshold = 1.2) {
    if (panel.empty()) throw std::invalid_argument("dispersion_diagnostic: empty panel");
    DispersionReport rep;
    rep.threshold = threshold;
    for (const auto& s : panel) {
        const double m = s.mean();
        const double v = s.variance();
        rep.mean.push_back(m);
        rep.variance.push_back(v);
        rep.ratio.push_back(m > 0.0 ? v / m : 0.0);
    }
    rep.median_ratio = detail::median(rep.ratio);
    rep.overdispersed = rep.median_ratio > threshold;
    return rep;
}

} // namespace inarmix

#endif
