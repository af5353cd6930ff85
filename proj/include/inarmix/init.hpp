#ifndef INARMIX_INIT_HPP
#define INARMIX_INIT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mixture.hpp"

namespace inarmix {

enum class SeedFeature { Mean, MeanVariance };

struct InitConfig {
    SeedFeature feature = SeedFeature::Mean;
    int kmeans_restarts = 10;
    double lambda_floor = 1e-3;
    std::vector<double> alpha_grid;  // defaults to 0.05..0.95 step 0.05
    std::vector<double> phi_grid;    // defaults to {1.25, 1.5, 2, 3, 4, 6, 8}
    int match_replicates = 20;
    double new_component_weight = 0.05;

    std::vector<double> effective_alpha_grid() const {
        if (!alpha_grid.empty()) return alpha_grid;
        std::vector<double> g;
        for (int i = 1; i <= 19; ++i) g.push_back(i * 0.05);
        return g;
    }

    std::vector<double> effective_phi_grid() const {
        if (!phi_grid.empty()) return phi_grid;
        return {1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0};
    }
};

struct KMeansSeed {
    std::vector<std::vector<double>> centers;  // sorted by first coordinate, descending
    std::vector<int> sizes;
    std::vector<int> assignment;               // cluster index per series
    bool collapsed = false;                    // fewer distinct features than requested G
};

namespace detail {

inline std::vector<std::vector<double>> seed_features(const Panel& panel, SeedFeature feature) {
    std::vector<std::vector<double>> pts(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) {
        pts[i] = {panel[i].mean()};
        if (feature == SeedFeature::MeanVariance) pts[i].push_back(panel[i].variance());
    }
    if (feature == SeedFeature::MeanVariance) {
        // scale each coordinate to unit spread so neither dominates
        for (std::size_t d = 0; d < 2; ++d) {
            double lo = pts[0][d], hi = pts[0][d];
            for (const auto& p : pts) {
                lo = std::min(lo, p[d]);
                hi = std::max(hi, p[d]);
            }
            const double span = hi - lo;
            if (span > 0.0)
                for (auto& p : pts) p[d] = (p[d] - lo) / span;
        }
    }
    return pts;
}

inline double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

struct KMeansRun {
    std::vector<std::vector<double>> centers;
    std::vector<int> assignment;
    double wcss = std::numeric_limits<double>::infinity();
};

inline KMeansRun lloyd_once(const std::vector<std::vector<double>>& pts, int G, Rng& rng) {
    const std::size_t n = pts.size();
    const std::size_t d = pts[0].size();
    KMeansRun run;

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    centers.push_back(pts[static_cast<std::size_t>(uniform01(rng) * n) % n]);
    std::vector<double> dist2(n);
    while (static_cast<int>(centers.size()) < G) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sqdist(pts[i], centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c)
                best = std::min(best, sqdist(pts[i], centers[c]));
            dist2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = uniform01(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += dist2[i];
                if (u <= cum) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(uniform01(rng) * n) % n;
        }
        centers.push_back(pts[pick]);
    }

    std::vector<int> assign(n, 0);
    for (int round = 0; round < 100; ++round) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sqdist(pts[i], centers[0]);
            for (int c = 1; c < G; ++c) {
                const double dd = sqdist(pts[i], centers[static_cast<std::size_t>(c)]);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(G),
                                              std::vector<double>(d, 0.0));
        std::vector<int> counts(static_cast<std::size_t>(G), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[static_cast<std::size_t>(assign[i])];
            for (std::size_t k = 0; k < d; ++k)
                sums[static_cast<std::size_t>(assign[i])][k] += pts[i][k];
        }
        for (int c = 0; c < G; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                // revive an empty cluster at the point farthest from its center
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dd =
                        sqdist(pts[i], centers[static_cast<std::size_t>(assign[i])]);
                    if (dd > fd) {
                        fd = dd;
                        far = i;
                    }
                }
                centers[static_cast<std::size_t>(c)] = pts[far];
                changed = true;
            } else {
                for (std::size_t k = 0; k < d; ++k)
                    centers[static_cast<std::size_t>(c)][k] =
                        sums[static_cast<std::size_t>(c)][k] / counts[static_cast<std::size_t>(c)];
            }
        }
        if (!changed) break;
    }

    run.centers = std::move(centers);
    run.assignment = std::move(assign);
    run.wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        run.wcss += sqdist(pts[i], run.centers[static_cast<std::size_t>(run.assignment[i])]);
    return run;
}

} // namespace detail

/// k-means(++) over per-series features (mean, optionally variance), best of
/// several restarts, centers reported in descending order of the mean
/// coordinate. When the panel has fewer distinct feature vectors than G the
/// result collapses to the distinct count and is flagged.
inline KMeansSeed kmeans_seed(const Panel& panel, int G, Rng& rng,
                              const InitConfig& cfg = {}) {
    if (panel.empty()) throw std::invalid_argument("kmeans_seed: empty panel");
    if (G < 1) throw std::domain_error("kmeans_seed: G must be >= 1");
    const auto pts = detail::seed_features(panel, cfg.feature);

    std::vector<std::vector<double>> distinct = pts;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const int G_eff = std::min<int>(G, static_cast<int>(distinct.size()));

    detail::KMeansRun best;
    for (int r = 0; r < std::max(1, cfg.kmeans_restarts); ++r) {
        detail::KMeansRun run = detail::lloyd_once(pts, G_eff, rng);
        if (run.wcss < best.wcss) best = std::move(run);
    }

    // drop empty clusters (possible only when duplicates defeat the revival)
    std::vector<int> remap(static_cast<std::size_t>(G_eff), -1);
    KMeansSeed seed;
    for (int c = 0; c < G_eff; ++c) {
        const long count = std::count(best.assignment.begin(), best.assignment.end(), c);
        if (count == 0) continue;
        remap[static_cast<std::size_t>(c)] = static_cast<int>(seed.centers.size());
        seed.centers.push_back(best.centers[static_cast<std::size_t>(c)]);
        seed.sizes.push_back(static_cast<int>(count));
    }
    seed.assignment.resize(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i)
        seed.assignment[i] = remap[static_cast<std::size_t>(best.assignment[i])];

    // order clusters by descending mean coordinate
    std::vector<std::size_t> order(seed.centers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return seed.centers[a][0] > seed.centers[b][0];
    });
    std::vector<int> rank(order.size());
    KMeansSeed sorted;
    for (std::size_t k = 0; k < order.size(); ++k) {
        rank[order[k]] = static_cast<int>(k);
        sorted.centers.push_back(seed.centers[order[k]]);
        sorted.sizes.push_back(seed.sizes[order[k]]);
    }
    sorted.assignment.resize(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i)
        sorted.assignment[i] = rank[static_cast<std::size_t>(seed.assignment[i])];
    sorted.collapsed = static_cast<int>(sorted.centers.size()) < G;
    return sorted;
}

struct AlphaPhi {
    double alpha = 0.5;
    double phi = 1.0;
};

/// Grid search for (alpha, phi) by simulation matching: for each candidate,
/// simulate panels shaped like the cluster with innovation mean lambda_init
/// and score the mean absolute difference of sorted per-series sums against
/// the observed ones (sorted pairing, since series within a cluster carry no
/// natural order). Larger alpha inflates sums through the thinning multiplier
/// and larger phi spreads them, so the same statistic identifies both.
inline AlphaPhi match_alpha_phi(const Panel& cluster, double lambda_init,
                                const ComponentSpec& spec, const InitConfig& cfg,
                                Rng& rng) {
    spec.validate();
    if (cluster.empty()) throw std::invalid_argument("match_alpha_phi: empty cluster");
    if (!(lambda_init > 0.0))
        throw std::domain_error("match_alpha_phi: lambda_init must be positive");

    AlphaPhi fallback{0.5, spec.family == Family::Poisson ? 1.0 : 2.0};
    bool all_zero = true;
    for (const auto& s : cluster)
        if (s.sum() != 0) {
            all_zero = false;
            break;
        }
    if (all_zero) return fallback;

    std::vector<double> obs_sums(cluster.size());
    for (std::size_t i = 0; i < cluster.size(); ++i)
        obs_sums[i] = static_cast<double>(cluster[i].sum());
    std::sort(obs_sums.begin(), obs_sums.end());

    const std::vector<double> alphas = cfg.effective_alpha_grid();
    const std::vector<double> phis =
        spec.family == Family::Poisson ? std::vector<double>{1.0} : cfg.effective_phi_grid();
    const int reps = std::max(1, cfg.match_replicates);
    const std::uint64_t base = rng();

    AlphaPhi best = fallback;
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<double> sim_sums(cluster.size());
    for (double phi : phis) {
        for (double alpha : alphas) {
            ComponentParams cand;
            cand.alpha = alpha;
            cand.innovation = spec.family == Family::Poisson
                                  ? InnovationModel::poisson(lambda_init)
                                  : InnovationModel::negative_binomial(lambda_init, phi);
            double total = 0.0;
            for (int r = 0; r < reps && total < best_total; ++r) {
                // common random numbers across candidates: same seed per
                // replicate. Per-replicate scores are non-negative, so a
                // candidate whose running total already exceeds the best can
                // be abandoned without changing the argmin.
                Rng sim_rng = make_rng(base, static_cast<std::uint64_t>(r));
                for (std::size_t i = 0; i < cluster.size(); ++i)
                    sim_sums[i] = static_cast<double>(
                        simulate_inar(spec, cand, cluster[i].length(), sim_rng).sum());
                std::sort(sim_sums.begin(), sim_sums.end());
                double diff = 0.0;
                for (std::size_t i = 0; i < cluster.size(); ++i)
                    diff += std::fabs(sim_sums[i] - obs_sums[i]);
                total += diff / cluster.size();
            }
            if (total < best_total) {
                best_total = total;
                best = {alpha, phi};
            }
        }
    }
    return best;
}

namespace detail {

/// Assign lag specs to clusters. With heterogeneous lags, clusters showing
/// the strongest autocorrelation advantage at a lag receive that lag,
/// respecting spec multiplicities; the k-means size/center ordering alone
/// says nothing about which cluster follows which lag.
inline std::vector<int> assign_specs_to_clusters(const Panel& panel,
                                                 const KMeansSeed& seed,
                                                 const std::vector<ComponentSpec>& specs) {
    const int C = static_cast<int>(seed.centers.size());
    const int G = static_cast<int>(specs.size());
    std::vector<int> spec_cluster(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) spec_cluster[static_cast<std::size_t>(g)] = g % C;

    std::vector<int> lags;
    for (const auto& s : specs) lags.push_back(s.lag);
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    if (lags.size() < 2 || C < 2) return spec_cluster;

    // median |acf| per cluster at each candidate lag
    std::vector<std::vector<double>> score(static_cast<std::size_t>(C),
                                           std::vector<double>(lags.size(), 0.0));
    for (int c = 0; c < C; ++c) {
        for (std::size_t l = 0; l < lags.size(); ++l) {
            std::vector<double> acfs;
            for (std::size_t i = 0; i < panel.size(); ++i)
                if (seed.assignment[i] == c)
                    acfs.push_back(std::fabs(autocorrelation(panel[i], lags[l])));
            if (acfs.empty()) continue;
            std::sort(acfs.begin(), acfs.end());
            score[static_cast<std::size_t>(c)][l] =
                acfs[acfs.size() / 2];
        }
    }

    // greedy: repeatedly give the unfilled (cluster, lag) pair with the
    // largest advantage its lag, honoring remaining multiplicities
    std::vector<int> need(lags.size(), 0);
    for (const auto& s : specs)
        need[static_cast<std::size_t>(
            std::lower_bound(lags.begin(), lags.end(), s.lag) - lags.begin())]++;
    std::vector<int> cluster_lag(static_cast<std::size_t>(C), -1);
    std::vector<int> cluster_quota(static_cast<std::size_t>(C), 0);
    for (int g = 0; g < G; ++g) ++cluster_quota[static_cast<std::size_t>(g % C)];
    std::vector<int> remaining = need;
    for (int step = 0; step < C; ++step) {
        int best_c = -1, best_l = -1;
        double best_adv = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < C; ++c) {
            if (cluster_lag[static_cast<std::size_t>(c)] >= 0) continue;
            for (std::size_t l = 0; l < lags.size(); ++l) {
                if (remaining[l] < cluster_quota[static_cast<std::size_t>(c)]) continue;
                double adv = score[static_cast<std::size_t>(c)][l];
                for (std::size_t o = 0; o < lags.size(); ++o)
                    if (o != l) adv -= score[static_cast<std::size_t>(c)][o] / (lags.size() - 1);
                if (adv > best_adv) {
                    best_adv = adv;
                    best_c = c;
                    best_l = static_cast<int>(l);
                }
            }
        }
        if (best_c < 0) break;
        cluster_lag[static_cast<std::size_t>(best_c)] = lags[static_cast<std::size_t>(best_l)];
        remaining[static_cast<std::size_t>(best_l)] -=
            cluster_quota[static_cast<std::size_t>(best_c)];
    }

    // map each spec to a cluster holding its lag; fall back to round-robin
    std::vector<int> budget = cluster_quota;
    for (int g = 0; g < G; ++g) {
        int chosen = -1;
        for (int c = 0; c < C; ++c)
            if (budget[static_cast<std::size_t>(c)] > 0 &&
                cluster_lag[static_cast<std::size_t>(c)] == specs[static_cast<std::size_t>(g)].lag) {
                chosen = c;
                break;
            }
        if (chosen < 0)
            for (int c = 0; c < C; ++c)
                if (budget[static_cast<std::size_t>(c)] > 0) {
                    chosen = c;
                    break;
                }
        if (chosen < 0) chosen = g % C;
        else --budget[static_cast<std::size_t>(chosen)];
        spec_cluster[static_cast<std::size_t>(g)] = chosen;
    }
    return spec_cluster;
}

} // namespace detail

/// Full initialization: k-means on per-series features fixes lambda (cluster
/// centers, floored) and the weights (cluster shares); (alpha, phi) follow by
/// simulation matching within each cluster.
inline MixtureModel initial_model(const Panel& panel, const std::vector<ComponentSpec>& specs,
                                  const InitConfig& cfg, Rng& rng) {
    if (specs.empty()) throw std::invalid_argument("initial_model: no component specs");
    for (const auto& s : specs) s.validate();
    const int G = static_cast<int>(specs.size());
    const KMeansSeed seed = kmeans_seed(panel, G, rng, cfg);
    const std::vector<int> spec_cluster = detail::assign_specs_to_clusters(panel, seed, specs);

    MixtureModel model;
    for (int g = 0; g < G; ++g) {
        const int c = spec_cluster[static_cast<std::size_t>(g)];
        const double lambda =
            std::max(seed.centers[static_cast<std::size_t>(c)][0], cfg.lambda_floor);

        Panel cluster;
        for (std::size_t i = 0; i < panel.size(); ++i)
            if (seed.assignment[i] == c) cluster.push_back(panel[i]);
        if (cluster.empty()) cluster = panel;

        const AlphaPhi ap = match_alpha_phi(cluster, lambda, specs[static_cast<std::size_t>(g)],
                                            cfg, rng);
        Component comp;
        comp.spec = specs[static_cast<std::size_t>(g)];
        comp.params.alpha = ap.alpha;
        comp.params.innovation =
            comp.spec.family == Family::Poisson
                ? InnovationModel::poisson(lambda)
                : InnovationModel::negative_binomial(lambda, ap.phi);
        model.components.push_back(comp);
        model.weights.push_back(
            std::max(static_cast<double>(seed.sizes[static_cast<std::size_t>(c)]) /
                         static_cast<double>(panel.size()) /
                         std::max(1, static_cast<int>(std::count(spec_cluster.begin(),
                                                                 spec_cluster.end(), c))),
                     1e-6));
    }
    model.normalize_weights();
    model.validate();
    return model;
}

/// Warm start for a grown structure: keep the fitted components, shrink their
/// weights by (1 - w_new) and append a fresh component at the panel grand
/// mean with neutral alpha and dispersion.
inline MixtureModel augment_model(const FitResult& previous, const Panel& panel,
                                  const ComponentSpec& new_spec, const InitConfig& cfg = {}) {
    new_spec.validate();
    MixtureModel model = previous.model;
    model.validate();
    const double w_new = cfg.new_component_weight;
    if (!(w_new > 0.0 && w_new < 1.0))
        throw std::domain_error("augment_model: new component weight must lie in (0, 1)");
    for (double& w : model.weights) w *= 1.0 - w_new;

    Component comp;
    comp.spec = new_spec;
    comp.params.alpha = 0.5;
    const double lambda = std::max(panel_grand_mean(panel), cfg.lambda_floor);
    comp.params.innovation = new_spec.family == Family::Poisson
                                 ? InnovationModel::poisson(lambda)
                                 : InnovationModel::negative_binomial(lambda, 2.0);
    model.components.push_back(comp);
    model.weights.push_back(w_new);
    model.validate();
    return model;
}

} // namespace inarmix

#endif
