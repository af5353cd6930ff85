#ifndef INARMIX_SIMSTUDY_HPP
#define INARMIX_SIMSTUDY_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baseline.hpp"
#include "eval.hpp"
#include "parallel.hpp"
#include "selection.hpp"

namespace inarmix {

struct TrueComponent {
    ComponentSpec spec;
    double weight = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
    double phi = 1.0;

    ComponentParams params() const {
        ComponentParams p;
        p.alpha = alpha;
        p.innovation = spec.family == Family::Poisson
                           ? InnovationModel::poisson(lambda)
                           : InnovationModel::negative_binomial(lambda, phi);
        return p;
    }
};

struct ScenarioSpec {
    std::string name;
    int n = 0;
    int T = 0;
    std::vector<TrueComponent> components;
    ModelGrid grid;
    int default_replications = 10;

    Family family() const { return grid.family; }

    void validate() const {
        if (n < 1 || T < 1) throw std::domain_error("ScenarioSpec: n and T must be >= 1");
        if (components.empty()) throw std::domain_error("ScenarioSpec: no components");
        grid.validate();
        double sum = 0.0;
        for (const auto& c : components) {
            c.spec.validate();
            c.params().validate();
            if (!(c.weight > 0.0)) throw std::domain_error("ScenarioSpec: weights must be positive");
            sum += c.weight;
        }
        if (std::fabs(sum - 1.0) > 1e-8)
            throw std::domain_error("ScenarioSpec: weights must sum to 1");
    }
};

struct LabeledPanel {
    Panel panel;
    std::vector<int> labels;  // component index per series
};

/// Draw a mixture panel: each series picks its component from the mixing
/// weights, then follows that component's INAR recursion.
inline LabeledPanel simulate_scenario_panel(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    LabeledPanel out;
    out.panel.reserve(static_cast<std::size_t>(spec.n));
    out.labels.reserve(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        const double u = uniform01(rng);
        double cum = 0.0;
        int g = static_cast<int>(spec.components.size()) - 1;
        for (std::size_t k = 0; k < spec.components.size(); ++k) {
            cum += spec.components[k].weight;
            if (u < cum) {
                g = static_cast<int>(k);
                break;
            }
        }
        const TrueComponent& c = spec.components[static_cast<std::size_t>(g)];
        out.panel.push_back(simulate_inar(c.spec, c.params(), spec.T, rng));
        out.labels.push_back(g);
    }
    return out;
}

namespace detail {

/// Align fitted components to true-component slots by minimum total
/// |fitted lambda - true lambda| over injective assignments; -1 marks a
/// fitted component left over as an extra. Exhaustive over the tiny
/// structure sizes used here.
inline std::vector<int> align_components(const std::vector<double>& fitted_lambda,
                                         const std::vector<double>& true_lambda) {
    const int M = static_cast<int>(fitted_lambda.size());
    const int K = static_cast<int>(true_lambda.size());
    const int assigned_target = std::min(M, K);

    std::vector<int> current(static_cast<std::size_t>(M), -1);
    std::vector<int> best(static_cast<std::size_t>(M), -1);
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<bool> used(static_cast<std::size_t>(K), false);

    auto rec = [&](auto&& self, int j, int assigned, double cost) -> void {
        if (cost >= best_cost) return;
        if (j == M) {
            if (assigned == assigned_target && cost < best_cost) {
                best_cost = cost;
                best = current;
            }
            return;
        }
        // remaining fitted components must still be able to fill the slots
        const int remaining = M - j - 1;
        for (int s = 0; s < K; ++s) {
            if (used[static_cast<std::size_t>(s)]) continue;
            used[static_cast<std::size_t>(s)] = true;
            current[static_cast<std::size_t>(j)] = s;
            self(self, j + 1, assigned + 1,
                 cost + std::fabs(fitted_lambda[static_cast<std::size_t>(j)] -
                                  true_lambda[static_cast<std::size_t>(s)]));
            used[static_cast<std::size_t>(s)] = false;
        }
        if (assigned + remaining >= assigned_target) {
            current[static_cast<std::size_t>(j)] = -1;
            self(self, j + 1, assigned, cost);
        }
    };
    rec(rec, 0, 0, 0.0);
    return best;
}

} // namespace detail

struct StudyOptions {
    std::uint64_t seed = 1;
    int replications = 0;  // overrides the scenario default when positive
    bool baseline = false;
    EmOptions em;          // epsilon 0.1 by default, matching the scenario scale
    InitConfig init;
    FcmddConfig fcmdd;
    int fcmdd_G_min = 2;
    int fcmdd_G_max = 3;
    unsigned threads = 0;  // 0 = all hardware threads
};

struct ScenarioReport {
    std::string scenario;
    int n = 0, T = 0;
    Family family = Family::Poisson;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    int replications_requested = 0;
    int replications_completed = 0;
    std::vector<std::string> errors;

    std::vector<double> ari;  // per completed replication
    double mean_ari = 0.0, sd_ari = 0.0;
    double mean_rand = 0.0;

    bool has_baseline = false;
    std::vector<double> fcmdd_ari;
    std::vector<int> fcmdd_G;
    double fcmdd_mean_ari = 0.0, fcmdd_sd_ari = 0.0;

    std::map<std::string, int> structure_counts;
    std::string modal_structure;

    /// Parameter recovery per true component; means over the replications in
    /// which some fitted component aligned to the slot.
    struct Slot {
        int true_lag = 0;
        double true_alpha = 0.0, true_weight = 0.0, true_lambda = 0.0, true_phi = 1.0;
        int count = 0;
        double alpha = 0.0, weight = 0.0, lambda = 0.0, phi = 0.0;  // running means
        std::map<int, int> fitted_lag_counts;
    };
    std::vector<Slot> slots;

    struct Extras {
        int count = 0;  // total extra components over all replications
        double alpha = 0.0, weight = 0.0, lambda = 0.0, phi = 0.0;
    } extras;

    /// Classification counts, truth x (aligned slot..., extra), summed over
    /// completed replications.
    std::vector<std::vector<long long>> crosstab;
};

namespace detail {

struct RepOutcome {
    bool ok = false;
    std::string error;
    double ari = 0.0, rand = 0.0;
    std::string structure;
    // per fitted component: slot (or -1) and estimates
    std::vector<int> slot_of_comp;
    std::vector<double> f_alpha, f_weight, f_lambda, f_phi;
    std::vector<int> f_lag;
    std::vector<std::vector<long long>> crosstab;
    double fcmdd_ari = 0.0;
    int fcmdd_G = 0;
};

} // namespace detail

/// Run one scenario end to end: simulate, search, score, optionally run the
/// DTW/fuzzy-C-medoids baseline, and aggregate recovery statistics aligned
/// to the true components. Replication failures are recorded, not fatal.
inline ScenarioReport run_scenario(const ScenarioSpec& spec, const StudyOptions& opts) {
    spec.validate();
    const int R = opts.replications > 0 ? opts.replications : spec.default_replications;
    const int K = static_cast<int>(spec.components.size());

    ScenarioReport rep;
    rep.scenario = spec.name;
    rep.n = spec.n;
    rep.T = spec.T;
    rep.family = spec.family();
    rep.seed = opts.seed;
    rep.epsilon = opts.em.epsilon;
    rep.replications_requested = R;
    rep.has_baseline = opts.baseline;
    rep.slots.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const TrueComponent& c = spec.components[static_cast<std::size_t>(k)];
        ScenarioReport::Slot& s = rep.slots[static_cast<std::size_t>(k)];
        s.true_lag = c.spec.lag;
        s.true_alpha = c.alpha;
        s.true_weight = c.weight;
        s.true_lambda = c.lambda;
        s.true_phi = c.phi;
    }
    rep.crosstab.assign(static_cast<std::size_t>(K),
                        std::vector<long long>(static_cast<std::size_t>(K) + 1, 0));
    if (R == 0) return rep;

    std::vector<double> true_lambda;
    for (const auto& c : spec.components) true_lambda.push_back(c.lambda);

    std::vector<detail::RepOutcome> outcomes(static_cast<std::size_t>(R));
    parallel_for(static_cast<std::size_t>(R), opts.threads, [&](std::size_t r) {
        detail::RepOutcome& out = outcomes[r];
        try {
            const std::uint64_t rep_seed = derive_seed(opts.seed, r);
            Rng sim_rng = make_rng(rep_seed, 0);
            Rng search_rng = make_rng(rep_seed, 1);

            const LabeledPanel data = simulate_scenario_panel(spec, sim_rng);
            SearchOptions sopts{opts.em, opts.init};
            const SearchResult search = model_search(data.panel, spec.grid, sopts, search_rng);
            const FitResult& fit = search.best_fit();

            out.structure = search.best_row().structure.label();
            out.ari = adjusted_rand_index(data.labels, fit.map_labels);
            out.rand = rand_index(data.labels, fit.map_labels);

            std::vector<double> fitted_lambda;
            for (const auto& c : fit.model.components) {
                fitted_lambda.push_back(c.params.innovation.lambda);
                out.f_alpha.push_back(c.params.alpha);
                out.f_lambda.push_back(c.params.innovation.lambda);
                out.f_phi.push_back(c.params.innovation.phi);
                out.f_lag.push_back(c.spec.lag);
            }
            out.f_weight = fit.model.weights;
            out.slot_of_comp = detail::align_components(fitted_lambda, true_lambda);

            out.crosstab.assign(static_cast<std::size_t>(K),
                                std::vector<long long>(static_cast<std::size_t>(K) + 1, 0));
            for (std::size_t i = 0; i < data.panel.size(); ++i) {
                const int slot = out.slot_of_comp[static_cast<std::size_t>(fit.map_labels[i])];
                const std::size_t col =
                    slot >= 0 ? static_cast<std::size_t>(slot) : static_cast<std::size_t>(K);
                ++out.crosstab[static_cast<std::size_t>(data.labels[i])][col];
            }

            if (opts.baseline) {
                Rng fcmdd_rng = make_rng(rep_seed, 2);
                const FcmddSelection sel = fcmdd_select(data.panel, opts.fcmdd_G_min,
                                                        opts.fcmdd_G_max, opts.fcmdd, fcmdd_rng);
                out.fcmdd_G = sel.G;
                out.fcmdd_ari = adjusted_rand_index(data.labels, sel.fit.labels());
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    });

    auto push_mean = [](double& mean, int count, double value) {
        mean += (value - mean) / count;
    };
    for (int r = 0; r < R; ++r) {
        const detail::RepOutcome& out = outcomes[static_cast<std::size_t>(r)];
        if (!out.ok) {
            rep.errors.push_back("replication " + std::to_string(r) + ": " + out.error);
            continue;
        }
        ++rep.replications_completed;
        rep.ari.push_back(out.ari);
        rep.mean_rand += out.rand;
        ++rep.structure_counts[out.structure];
        for (std::size_t j = 0; j < out.slot_of_comp.size(); ++j) {
            const int slot = out.slot_of_comp[j];
            if (slot >= 0) {
                ScenarioReport::Slot& s = rep.slots[static_cast<std::size_t>(slot)];
                ++s.count;
                push_mean(s.alpha, s.count, out.f_alpha[j]);
                push_mean(s.weight, s.count, out.f_weight[j]);
                push_mean(s.lambda, s.count, out.f_lambda[j]);
                push_mean(s.phi, s.count, out.f_phi[j]);
                ++s.fitted_lag_counts[out.f_lag[j]];
            } else {
                ScenarioReport::Extras& e = rep.extras;
                ++e.count;
                push_mean(e.alpha, e.count, out.f_alpha[j]);
                push_mean(e.weight, e.count, out.f_weight[j]);
                push_mean(e.lambda, e.count, out.f_lambda[j]);
                push_mean(e.phi, e.count, out.f_phi[j]);
            }
        }
        for (int a = 0; a < K; ++a)
            for (int b = 0; b <= K; ++b)
                rep.crosstab[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                    out.crosstab[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (opts.baseline) {
            rep.fcmdd_ari.push_back(out.fcmdd_ari);
            rep.fcmdd_G.push_back(out.fcmdd_G);
        }
    }

    auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = 0.0;
        sd = 0.0;
        if (v.empty()) return;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) return;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    mean_sd(rep.ari, rep.mean_ari, rep.sd_ari);
    if (rep.replications_completed > 0) rep.mean_rand /= rep.replications_completed;
    mean_sd(rep.fcmdd_ari, rep.fcmdd_mean_ari, rep.fcmdd_sd_ari);

    int best_count = 0;
    for (const auto& [label, count] : rep.structure_counts)
        if (count > best_count) {
            best_count = count;
            rep.modal_structure = label;
        }
    return rep;
}

/// The ten study scenarios: five separations for the Poisson panels
/// (two INAR(5*) components, n=200, T=50, search lags 5 and 10) and five for
/// the negative binomial panels (INAR(2*) + INAR(4*), n=250, T=30, search
/// lags 2 and 4).
inline std::vector<ScenarioSpec> builtin_scenarios() {
    auto poisson = [](const std::string& name, double a1, double l1, double a2, double l2) {
        ScenarioSpec s;
        s.name = "poisson-" + name;
        s.n = 200;
        s.T = 50;
        s.grid = {5, 10, 2, 3, ModelGrid::HRule::ZeroOne, Family::Poisson};
        s.components = {
            {{5, Family::Poisson}, 0.375, a1, l1, 1.0},
            {{5, Family::Poisson}, 0.625, a2, l2, 1.0},
        };
        return s;
    };
    auto nb = [](const std::string& name, double a1, double l1, double p1, double a2, double l2,
                 double p2) {
        ScenarioSpec s;
        s.name = "nb-" + name;
        s.n = 250;
        s.T = 30;
        s.grid = {2, 4, 2, 3, ModelGrid::HRule::ZeroOne, Family::NegativeBinomial};
        s.components = {
            {{2, Family::NegativeBinomial}, 0.60, a1, l1, p1},
            {{4, Family::NegativeBinomial}, 0.40, a2, l2, p2},
        };
        return s;
    };
    return {
        poisson("very-easy", 0.20, 7.00, 0.70, 0.50),
        poisson("easy", 0.40, 6.00, 0.70, 0.50),
        poisson("moderate", 0.40, 6.00, 0.50, 2.00),
        poisson("difficult", 0.45, 4.00, 0.50, 2.00),
        poisson("very-difficult", 0.45, 4.00, 0.50, 3.00),
        nb("very-easy", 0.80, 1.00, 4.0, 0.20, 9.00, 2.0),
        nb("easy", 0.70, 3.00, 4.0, 0.20, 9.00, 2.0),
        nb("moderate", 0.70, 3.00, 4.0, 0.35, 7.00, 2.0),
        nb("difficult", 0.50, 4.00, 4.0, 0.35, 7.00, 2.0),
        nb("very-difficult", 0.50, 4.00, 4.0, 0.40, 6.00, 2.0),
    };
}

inline std::optional<ScenarioSpec> find_scenario(const std::string& name) {
    for (auto& s : builtin_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

/// Fixed-width text rendering of a scenario report.
inline std::string format_report_table(const ScenarioReport& rep) {
    char buf[256];
    std::string out;
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out += buf;
        out += '\n';
    };
    line("scenario: %s  (n=%d, T=%d, family=%s, reps=%d/%d, seed=%llu, epsilon=%g)",
         rep.scenario.c_str(), rep.n, rep.T, family_name(rep.family),
         rep.replications_completed, rep.replications_requested,
         static_cast<unsigned long long>(rep.seed), rep.epsilon);
    line("%-6s %28s   %28s %5s", "comp", "true alpha/w/lambda/phi (lag)",
         "mean est alpha/w/lambda/phi", "reps");
    for (std::size_t k = 0; k < rep.slots.size(); ++k) {
        const auto& s = rep.slots[k];
        if (s.count > 0)
            line("%-6zu %5.3f %5.3f %6.3f %5.3f (%d)   %5.3f %5.3f %6.3f %5.3f %5d", k + 1,
                 s.true_alpha, s.true_weight, s.true_lambda, s.true_phi, s.true_lag, s.alpha,
                 s.weight, s.lambda, s.phi, s.count);
        else
            line("%-6zu %5.3f %5.3f %6.3f %5.3f (%d)   %28s %5d", k + 1, s.true_alpha,
                 s.true_weight, s.true_lambda, s.true_phi, s.true_lag, "-", 0);
    }
    if (rep.extras.count > 0)
        line("%-6s %28s   %5.3f %5.3f %6.3f %5.3f %5d", "extra", "-", rep.extras.alpha,
             rep.extras.weight, rep.extras.lambda, rep.extras.phi, rep.extras.count);
    line("mean ARI %.3f (sd %.3f)   mean Rand %.3f", rep.mean_ari, rep.sd_ari, rep.mean_rand);
    if (rep.has_baseline)
        line("fcmdd mean ARI %.3f (sd %.3f)", rep.fcmdd_mean_ari, rep.fcmdd_sd_ari);
    out += "selected structures:";
    for (const auto& [label, count] : rep.structure_counts) {
        std::snprintf(buf, sizeof(buf), " %dx[%s]", count, label.c_str());
        out += buf;
    }
    out += '\n';
    if (!rep.crosstab.empty() && rep.replications_completed > 0) {
        out += "classification (mean counts per replication):\n";
        std::string hdr = "        ";
        for (std::size_t k = 0; k < rep.slots.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "   pred%zu", k + 1);
            hdr += buf;
        }
        out += hdr + "   extra\n";
        for (std::size_t a = 0; a < rep.crosstab.size(); ++a) {
            std::snprintf(buf, sizeof(buf), "true%-4zu", a + 1);
            out += buf;
            for (std::size_t b = 0; b < rep.crosstab[a].size(); ++b) {
                std::snprintf(buf, sizeof(buf), " %7.1f",
                              static_cast<double>(rep.crosstab[a][b]) /
                                  rep.replications_completed);
                out += buf;
            }
            out += '\n';
        }
    }
    for (const auto& e : rep.errors) out += "error: " + e + "\n";
    return out;
}

} // namespace inarmix

#endif
