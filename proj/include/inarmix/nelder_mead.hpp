#ifndef INARMIX_NELDER_MEAD_HPP
#define INARMIX_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace inarmix {

struct NelderMeadOptions {
    int max_evals = 600;
    double ftol_abs = 1e-9;     // stop when simplex f-spread falls below this...
    double ftol_rel = 1e-10;    // ...plus this times |f_best|
    double initial_step = 0.5;  // per-coordinate displacement of the initial simplex
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (Nelder-Mead, standard coefficients).
/// The start point is kept as a vertex of the initial simplex, so the result
/// is never worse than f(x0). Infinite objective values are tolerated; they
/// rank worse than any finite vertex.
inline NelderMeadResult nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& fn,
                                             const std::vector<double>& x0,
                                             const NelderMeadOptions& opts = {}) {
    const std::size_t d = x0.size();
    const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> fv(d + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double f = fn(x);
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    };

    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += opts.initial_step;
    for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(d + 1);
    auto sort_simplex = [&] {
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    bool converged = false;
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    while (evals < opts.max_evals) {
        sort_simplex();
        const std::size_t best = order[0], worst = order[d], second = order[d == 0 ? 0 : d - 1];
        const double spread = fv[worst] - fv[best];
        if (std::isfinite(fv[worst]) &&
            spread <= opts.ftol_abs + opts.ftol_rel * std::fabs(fv[best])) {
            converged = true;
            break;
        }

        for (std::size_t j = 0; j < d; ++j) {
            double c = 0.0;
            for (std::size_t i = 0; i <= d; ++i)
                if (i != worst) c += pts[i][j];
            centroid[j] = c / d;
        }

        for (std::size_t j = 0; j < d; ++j)
            xr[j] = centroid[j] + reflect * (centroid[j] - pts[worst][j]);
        const double fr = eval(xr);

        if (fr < fv[best]) {
            for (std::size_t j = 0; j < d; ++j)
                xe[j] = centroid[j] + expand * (xr[j] - centroid[j]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const std::vector<double>& towards = outside ? xr : pts[worst];
            for (std::size_t j = 0; j < d; ++j)
                xc[j] = centroid[j] + contract * (towards[j] - centroid[j]);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        pts[i][j] = pts[best][j] + shrink * (pts[i][j] - pts[best][j]);
                    fv[i] = eval(pts[i]);
                }
            }
        }
    }

    sort_simplex();
    NelderMeadResult res;
    res.x = pts[order[0]];
    res.f = fv[order[0]];
    res.evals = evals;
    res.converged = converged;
    return res;
}

} // namespace inarmix

#endif
