#ifndef INARMIX_BASELINE_HPP
#define INARMIX_BASELINE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "series.hpp"

namespace inarmix {

/// Dynamic time warping distance with L1 local cost and the unconstrained
/// step pattern {match, insert, delete}.
inline double dtw_distance(const CountSeries& a, const CountSeries& b) {
    const int n = a.length(), m = b.length();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(static_cast<std::size_t>(m) + 1, inf);
    std::vector<double> cur(static_cast<std::size_t>(m) + 1, inf);
    prev[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (int j = 1; j <= m; ++j) {
            const double cost = std::fabs(static_cast<double>(a[i - 1]) - b[j - 1]);
            cur[static_cast<std::size_t>(j)] =
                cost + std::min({prev[static_cast<std::size_t>(j)],
                                 cur[static_cast<std::size_t>(j - 1)],
                                 prev[static_cast<std::size_t>(j - 1)]});
        }
        std::swap(prev, cur);
    }
    return prev[static_cast<std::size_t>(m)];
}

/// Full symmetric pairwise DTW matrix, row-major n x n.
inline std::vector<double> dtw_distance_matrix(const Panel& panel) {
    const std::size_t n = panel.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = dtw_distance(panel[i], panel[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    return d;
}

struct FcmddConfig {
    double fuzziness = 2.0;
    int random_starts = 5;
    double tolerance = 1e-2;  // absolute change of the objective
    int max_iters = 100;
};

struct FcmddResult {
    std::size_t n = 0;
    std::size_t G = 0;
    std::vector<int> medoids;
    std::vector<double> membership;  // row-major n x G
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;

    double u(std::size_t i, std::size_t g) const { return membership[i * G + g]; }

    /// Crisp labels by largest membership, ties toward the lower index.
    std::vector<int> labels() const {
        std::vector<int> lab(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t g = 1; g < G; ++g)
                if (u(i, g) > u(i, best)) best = g;
            lab[i] = static_cast<int>(best);
        }
        return lab;
    }
};

namespace detail {

inline void fcmdd_memberships(const std::vector<double>& dist, std::size_t n,
                              const std::vector<int>& medoids, double m,
                              std::vector<double>& u) {
    const std::size_t G = medoids.size();
    const double expo = 1.0 / (m - 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        int zero_at = -1;
        for (std::size_t g = 0; g < G; ++g)
            if (dist[i * n + static_cast<std::size_t>(medoids[g])] == 0.0) {
                zero_at = static_cast<int>(g);
                break;
            }
        if (zero_at >= 0) {
            for (std::size_t g = 0; g < G; ++g)
                u[i * G + g] = static_cast<int>(g) == zero_at ? 1.0 : 0.0;
            continue;
        }
        double sum = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const double w =
                std::pow(1.0 / dist[i * n + static_cast<std::size_t>(medoids[g])], expo);
            u[i * G + g] = w;
            sum += w;
        }
        for (std::size_t g = 0; g < G; ++g) u[i * G + g] /= sum;
    }
}

inline double fcmdd_objective(const std::vector<double>& dist, std::size_t n,
                              const std::vector<int>& medoids,
                              const std::vector<double>& u, double m) {
    const std::size_t G = medoids.size();
    double J = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t g = 0; g < G; ++g)
            J += std::pow(u[i * G + g], m) * dist[i * n + static_cast<std::size_t>(medoids[g])];
    return J;
}

} // namespace detail

/// Fuzzy C-medoids over a precomputed distance matrix: alternate the closed-
/// form membership update with medoid relocation to the series minimizing the
/// weighted within-cluster cost. Best of several random starts.
inline FcmddResult fcmdd_fit_matrix(const std::vector<double>& dist, std::size_t n, int G,
                                    const FcmddConfig& cfg, Rng& rng) {
    if (n == 0) throw std::invalid_argument("fcmdd_fit: empty panel");
    if (G < 1 || static_cast<std::size_t>(G) > n)
        throw std::domain_error("fcmdd_fit: G must lie in [1, n]");
    if (!(cfg.fuzziness > 1.0))
        throw std::domain_error("fcmdd_fit: fuzziness must exceed 1");
    if (dist.size() != n * n)
        throw std::invalid_argument("fcmdd_fit: distance matrix must be n x n");

    FcmddResult best;
    best.n = n;
    best.G = static_cast<std::size_t>(G);

    std::vector<std::size_t> idx(n);
    for (int start = 0; start < std::max(1, cfg.random_starts); ++start) {
        // distinct random medoids by partial shuffle
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<int> medoids(static_cast<std::size_t>(G));
        for (int g = 0; g < G; ++g) {
            const std::size_t pick =
                static_cast<std::size_t>(g) +
                static_cast<std::size_t>(uniform01(rng) * (n - static_cast<std::size_t>(g))) %
                    (n - static_cast<std::size_t>(g));
            std::swap(idx[static_cast<std::size_t>(g)], idx[pick]);
            medoids[static_cast<std::size_t>(g)] = static_cast<int>(idx[static_cast<std::size_t>(g)]);
        }

        std::vector<double> u(n * static_cast<std::size_t>(G), 0.0);
        std::vector<double> trace;
        double J_prev = std::numeric_limits<double>::infinity();
        bool converged = false;
        int iter = 0;
        while (iter < cfg.max_iters) {
            ++iter;
            detail::fcmdd_memberships(dist, n, medoids, cfg.fuzziness, u);

            // relocate each medoid to the global minimizer of its weighted cost
            for (int g = 0; g < G; ++g) {
                double best_cost = std::numeric_limits<double>::infinity();
                int best_j = medoids[static_cast<std::size_t>(g)];
                for (std::size_t j = 0; j < n; ++j) {
                    double cost = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        cost += std::pow(u[i * static_cast<std::size_t>(G) +
                                           static_cast<std::size_t>(g)],
                                         cfg.fuzziness) *
                                dist[i * n + j];
                    if (cost < best_cost) {
                        best_cost = cost;
                        best_j = static_cast<int>(j);
                    }
                }
                medoids[static_cast<std::size_t>(g)] = best_j;
            }

            const double J = detail::fcmdd_objective(dist, n, medoids, u, cfg.fuzziness);
            trace.push_back(J);
            if (std::fabs(J_prev - J) <= cfg.tolerance) {
                converged = true;
                J_prev = J;
                break;
            }
            J_prev = J;
        }

        detail::fcmdd_memberships(dist, n, medoids, cfg.fuzziness, u);
        const double J = detail::fcmdd_objective(dist, n, medoids, u, cfg.fuzziness);
        if (J < best.objective) {
            best.medoids = medoids;
            best.membership = std::move(u);
            best.objective = J;
            best.objective_trace = std::move(trace);
            best.iterations = iter;
            best.converged = converged;
        }
    }
    return best;
}

inline FcmddResult fcmdd_fit(const Panel& panel, int G, const FcmddConfig& cfg, Rng& rng) {
    return fcmdd_fit_matrix(dtw_distance_matrix(panel), panel.size(), G, cfg, rng);
}

struct FcmddSelection {
    int G = 0;
    FcmddResult fit;
    std::vector<std::pair<int, double>> validity;  // (G, compactness/separation index)
};

/// Choose G by the compactness-to-separation index J / (n * min inter-medoid
/// distance), smaller is better, ties toward smaller G. The requested range
/// is capped at n - 1.
inline FcmddSelection fcmdd_select_matrix(const std::vector<double>& dist, std::size_t n,
                                          int G_min, int G_max, const FcmddConfig& cfg,
                                          Rng& rng) {
    if (G_min < 2) throw std::domain_error("fcmdd_select: G_min must be >= 2");
    G_max = std::min<int>(G_max, static_cast<int>(n) - 1);
    if (G_max < G_min) throw std::domain_error("fcmdd_select: empty G range after capping");

    FcmddSelection sel;
    double best_index = std::numeric_limits<double>::infinity();
    for (int G = G_min; G <= G_max; ++G) {
        FcmddResult fit = fcmdd_fit_matrix(dist, n, G, cfg, rng);
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < fit.medoids.size(); ++a)
            for (std::size_t b = a + 1; b < fit.medoids.size(); ++b)
                min_sep = std::min(min_sep,
                                   dist[static_cast<std::size_t>(fit.medoids[a]) * n +
                                        static_cast<std::size_t>(fit.medoids[b])]);
        const double index = min_sep > 0.0
                                 ? fit.objective / (static_cast<double>(n) * min_sep)
                                 : std::numeric_limits<double>::infinity();
        sel.validity.emplace_back(G, index);
        if (index < best_index) {
            best_index = index;
            sel.G = G;
            sel.fit = std::move(fit);
        }
    }
    if (sel.G == 0) {
        // every candidate had coinciding medoids; fall back to the smallest G
        Rng retry = rng;
        sel.G = G_min;
        sel.fit = fcmdd_fit_matrix(dist, n, G_min, cfg, retry);
    }
    return sel;
}

inline FcmddSelection fcmdd_select(const Panel& panel, int G_min, int G_max,
                                   const FcmddConfig& cfg, Rng& rng) {
    return fcmdd_select_matrix(dtw_distance_matrix(panel), panel.size(), G_min, G_max, cfg, rng);
}

} // namespace inarmix

#endif
