// End-to-end acceptance checks for the count-series mixture toolkit. Each
// numbered line is one release criterion; the process exits nonzero if any
// line fails. Statistical criteria run the full pipeline (simulate -> model
// search -> evaluate) at a fixed seed with desk-scale replication counts.

#include <inarmix/inarmix.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifdef __unix__
#include <sys/wait.h>
#endif

using namespace inarmix;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(const std::string& number, const std::string& what, bool ok,
           const std::string& got) {
    std::printf("[%s] %s %s (%s)\n", ok ? "PASS" : "FAIL", number.c_str(), what.c_str(),
                got.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

ScenarioReport run(const std::string& name, int reps, bool baseline) {
    const ScenarioSpec spec = *find_scenario(name);
    StudyOptions opts;
    opts.seed = 101;
    opts.replications = reps;
    opts.baseline = baseline;
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioReport rep = run_scenario(spec, opts);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  info: %-24s reps=%-3d mean ARI %.4f (sd %.3f)%s modal %s [%.0fs]\n",
                name.c_str(), rep.replications_completed, rep.mean_ari, rep.sd_ari,
                baseline ? fmt(" fcmdd %.3f", rep.fcmdd_mean_ari).c_str() : "",
                rep.modal_structure.c_str(), secs);
    std::fflush(stdout);
    for (const auto& e : rep.errors) std::printf("  info: replication error: %s\n", e.c_str());
    return rep;
}

// ---- independent oracles for the property criteria --------------------------

long double naive_innovation_pmf(const InnovationModel& m, int k) {
    if (m.family == Family::Poisson) {
        long double p = std::exp((long double)-m.lambda);
        for (int i = 1; i <= k; ++i) p *= (long double)m.lambda / i;
        return p;
    }
    const long double r = m.lambda / (m.phi - 1.0);
    const long double p = 1.0L / m.phi;
    long double coef = 1.0L;
    for (int i = 0; i < k; ++i) coef *= (r + i) / (i + 1);
    return coef * std::pow(p, r) * std::pow(1.0L - p, (long double)k);
}

long double naive_binomial_pmf(int k, int n, long double a) {
    if (k < 0 || k > n) return 0.0L;
    long double coef = 1.0L;
    for (int i = 0; i < k; ++i) coef *= (long double)(n - i) / (i + 1);
    return coef * std::pow(a, (long double)k) * std::pow(1.0L - a, (long double)(n - k));
}

long double naive_series_prob(const std::vector<int>& x, const ComponentSpec& spec,
                              const ComponentParams& p) {
    long double prob = 1.0L;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (t < (std::size_t)spec.lag) {
            prob *= naive_innovation_pmf(p.innovation, x[t]);
        } else {
            long double cond = 0.0L;
            const int lagv = x[t - (std::size_t)spec.lag];
            for (int k = 0; k <= std::min(x[t], lagv); ++k)
                cond += naive_binomial_pmf(k, lagv, p.alpha) *
                        naive_innovation_pmf(p.innovation, x[t] - k);
            prob *= cond;
        }
    }
    return prob;
}

double brute_ari(const std::vector<int>& a, const std::vector<int>& b) {
    long ss = 0, sd = 0, ds = 0, dd = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j], sb = b[i] == b[j];
            if (sa && sb) ++ss;
            else if (sa) ++sd;
            else if (sb) ++ds;
            else ++dd;
        }
    const double n = (double)(ss + sd + ds + dd);
    if (n == 0) return 1.0;
    const double sum_a = (double)(ss + sd), sum_b = (double)(ss + ds);
    const double expected = sum_a * sum_b / n;
    const double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) return (double)ss == maximum ? 1.0 : 0.0;
    return ((double)ss - expected) / (maximum - expected);
}

std::vector<std::vector<int>> all_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> rgs((std::size_t)n, 0);
    auto rec = [&](auto&& self, int i, int max_used) -> void {
        if (i == n) {
            out.push_back(rgs);
            return;
        }
        for (int v = 0; v <= max_used + 1; ++v) {
            rgs[(std::size_t)i] = v;
            self(self, i + 1, std::max(max_used, v));
        }
    };
    rec(rec, 1, 0);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<unreadable:" + p.string() + ">";
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

int run_cli(const std::string& bin, const std::string& args, const fs::path& log) {
    const std::string cmd = bin + " " + args + " >" + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
#ifdef __unix__
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
#else
    return rc;
#endif
}

}  // namespace

int main() {
    std::printf("== scenario batteries (seed 101) ==\n");
    const ScenarioReport p_ve = run("poisson-very-easy", 10, false);
    const ScenarioReport p_e = run("poisson-easy", 10, false);
    const ScenarioReport p_m = run("poisson-moderate", 10, false);
    const ScenarioReport p_d = run("poisson-difficult", 10, false);
    const ScenarioReport p_vd = run("poisson-very-difficult", 20, true);
    const ScenarioReport nb_ve = run("nb-very-easy", 10, true);
    const ScenarioReport nb_e = run("nb-easy", 10, true);
    const ScenarioReport nb_m = run("nb-moderate", 10, true);
    const ScenarioReport nb_d = run("nb-difficult", 10, true);
    const ScenarioReport nb_vd = run("nb-very-difficult", 10, true);

    std::printf("== criteria ==\n");

    check("1.", "near-separable Poisson scenarios classify almost perfectly "
                "(mean ARI >= 0.98 over 10 runs each)",
          p_ve.mean_ari >= 0.98 && p_e.mean_ari >= 0.98,
          fmt("very-easy %.4f, easy %.4f", p_ve.mean_ari, p_e.mean_ari));

    check("2.", "heavily overlapping Poisson scenario lands mid-range "
                "(mean ARI in [0.40, 0.75] over 20 runs)",
          p_vd.mean_ari >= 0.40 && p_vd.mean_ari <= 0.75,
          fmt("very-difficult %.4f", p_vd.mean_ari));

    check("3.", "negative-binomial ladder: mean ARI >= 0.95 (very-easy/easy/moderate) "
                "and >= 0.90 (difficult/very-difficult) over 10 runs each",
          nb_ve.mean_ari >= 0.95 && nb_e.mean_ari >= 0.95 && nb_m.mean_ari >= 0.95 &&
              nb_d.mean_ari >= 0.90 && nb_vd.mean_ari >= 0.90,
          fmt("%.4f / %.4f / %.4f / %.4f / %.4f", nb_ve.mean_ari, nb_e.mean_ari,
              nb_m.mean_ari, nb_d.mean_ari, nb_vd.mean_ari));

    {
        const ScenarioReport::Slot* slot = nullptr;
        for (const auto& s : nb_ve.slots)
            if (s.true_lambda == 1.0) slot = &s;
        const bool found = slot != nullptr && slot->count > 0;
        const bool ok = found && std::fabs(slot->alpha - 0.80) <= 0.05 &&
                        std::fabs(slot->weight - 0.60) <= 0.05 &&
                        std::fabs(slot->lambda - 1.00) <= 0.15 &&
                        std::fabs(slot->phi - 4.00) <= 0.75;
        check("4.", "nb-very-easy recovers the low-mean component "
                    "(|alpha-0.80|<=0.05, |weight-0.60|<=0.05, |lambda-1.00|<=0.15, "
                    "|phi-4.00|<=0.75)",
              ok,
              found ? fmt("alpha %.3f, weight %.3f, lambda %.3f, phi %.3f", slot->alpha,
                          slot->weight, slot->lambda, slot->phi)
                    : std::string("no aligned component"));
    }

    {
        long correct = 0;
        const auto it = nb_vd.structure_counts.find("1xINAR(2*)+1xINAR(4*)");
        if (it != nb_vd.structure_counts.end()) correct = it->second;
        const bool ok = correct >= 9 && p_m.modal_structure == "2xINAR(5*)" &&
                        p_d.modal_structure == "2xINAR(5*)";
        check("5.", "structure selection: nb-very-difficult chooses 1xINAR(2*)+1xINAR(4*) "
                    "in >= 9/10 runs; poisson moderate and difficult are modally 2xINAR(5*)",
              ok,
              fmt("nb-vd %ld/10, poisson modal '%s' / '%s'", correct,
                  p_m.modal_structure.c_str(), p_d.modal_structure.c_str()));
    }

    check("6.", "model-based clustering strictly beats the DTW/fuzzy-medoids baseline "
                "on every nb scenario and on poisson-very-difficult (mean ARI)",
          nb_ve.mean_ari > nb_ve.fcmdd_mean_ari && nb_e.mean_ari > nb_e.fcmdd_mean_ari &&
              nb_m.mean_ari > nb_m.fcmdd_mean_ari && nb_d.mean_ari > nb_d.fcmdd_mean_ari &&
              nb_vd.mean_ari > nb_vd.fcmdd_mean_ari &&
              p_vd.mean_ari > p_vd.fcmdd_mean_ari,
          fmt("nb %.3f>%.3f %.3f>%.3f %.3f>%.3f %.3f>%.3f %.3f>%.3f, poisson-vd %.3f>%.3f",
              nb_ve.mean_ari, nb_ve.fcmdd_mean_ari, nb_e.mean_ari, nb_e.fcmdd_mean_ari,
              nb_m.mean_ari, nb_m.fcmdd_mean_ari, nb_d.mean_ari, nb_d.fcmdd_mean_ari,
              nb_vd.mean_ari, nb_vd.fcmdd_mean_ari, p_vd.mean_ari, p_vd.fcmdd_mean_ari));

    // 7a. conditional transition probabilities stay normalized across the grid
    {
        double worst = 0.0;
        for (int x_lag : {0, 5, 13, 30})
            for (int ia = 0; ia <= 10; ++ia)
                for (double lambda : {0.5, 3.0, 10.0})
                    for (double phi : {1.0, 2.0, 4.0}) {
                        const InnovationModel m =
                            phi == 1.0 ? InnovationModel::poisson(lambda)
                                       : InnovationModel::negative_binomial(lambda, phi);
                        const ComponentParams p{ia * 0.1, m};
                        const int K = x_lag + innovation_truncation(m) + 8;
                        double sum = 0.0;
                        for (int x_t = 0; x_t <= K; ++x_t)
                            sum += conditional_pmf(x_t, x_lag, p);
                        worst = std::max(worst, std::fabs(sum - 1.0));
                    }
        check("7a.", "conditional pmf normalization within 1e-8 across the parameter grid",
              worst <= 1e-8, fmt("worst |sum-1| = %.2e", worst));
    }

    // 7b. likelihood agrees with a naive enumerated oracle on short series
    {
        Rng rng = make_rng(2024);
        double worst = 0.0;
        for (int rep = 0; rep < 80; ++rep) {
            const int lag = 1 + (int)(rng() % 2);
            const int T = 2 + (int)(rng() % 4);
            std::vector<int> vals((std::size_t)T);
            for (auto& v : vals) v = (int)(rng() % 5);
            const bool nb = rep % 2 == 0;
            const ComponentSpec spec{lag, nb ? Family::NegativeBinomial : Family::Poisson};
            const ComponentParams p{0.1 + 0.8 * uniform01(rng),
                                    nb ? InnovationModel::negative_binomial(
                                             0.5 + 2.0 * uniform01(rng), 2.5)
                                       : InnovationModel::poisson(0.5 + 2.0 * uniform01(rng))};
            const double oracle = (double)std::log(naive_series_prob(vals, spec, p));
            const double got = series_loglik(CountSeries{vals}, spec, p);
            worst = std::max(worst,
                             std::fabs(got - oracle) / std::max(1.0, std::fabs(oracle)));
        }
        check("7b.", "series log-likelihood matches brute-force enumeration within 1e-12 "
                     "on series of length <= 5",
              worst <= 1e-12, fmt("worst relative gap = %.2e", worst));
    }

    // 7c/7d. EM monotonicity and responsibility normalization on a real fit
    {
        const ScenarioSpec spec = *find_scenario("nb-moderate");
        Rng sim_rng = make_rng(3001);
        LabeledPanel lp = simulate_scenario_panel(spec, sim_rng);
        lp.panel.resize(80);
        Rng init_rng = make_rng(3002);
        const MixtureModel init = initial_model(
            lp.panel, {{2, Family::NegativeBinomial}, {4, Family::NegativeBinomial}},
            InitConfig{}, init_rng);
        const FitResult fit = fit_em(lp.panel, init);

        bool monotone = fit.loglik_trace.size() >= 2;
        double worst_drop = 0.0;
        for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k)
            worst_drop =
                std::max(worst_drop, fit.loglik_trace[k - 1] - fit.loglik_trace[k]);
        monotone = monotone && worst_drop <= 1e-6;
        check("7c.", "EM log-likelihood trace is monotone within 1e-6", monotone,
              fmt("worst drop = %.2e over %zu iterations", worst_drop,
                  fit.loglik_trace.size() - 1));

        double worst_row = 0.0;
        for (std::size_t i = 0; i < fit.resp.n; ++i)
            worst_row = std::max(worst_row, std::fabs(fit.resp.row_sum(i) - 1.0));
        check("7d.", "responsibility rows sum to one within 1e-10", worst_row <= 1e-10,
              fmt("worst |row-1| = %.2e", worst_row));

        // 7e. on every recorded trace prefix, the stricter stopping rule implies
        // the looser one at the same tolerance
        bool strict_ok = true;
        std::vector<std::vector<double>> traces{fit.loglik_trace};
        Rng trng = make_rng(3003);
        for (int t = 0; t < 200; ++t) {
            std::vector<double> tr{-150.0 - 100.0 * uniform01(trng)};
            double step = 1.0 + 30.0 * uniform01(trng);
            const double decay = 0.15 + 0.8 * uniform01(trng);
            const int len = 3 + (int)(trng() % 9);
            for (int k = 1; k < len; ++k) {
                tr.push_back(tr.back() + step);
                step *= decay;
            }
            traces.push_back(tr);
        }
        for (const auto& tr : traces)
            for (std::size_t cut = 3; cut <= tr.size() && strict_ok; ++cut) {
                const std::vector<double> prefix(tr.begin(), tr.begin() + (long)cut);
                for (double eps : {1e-3, 1e-2, 0.1, 1.0, 10.0})
                    if (aitken_converged(prefix, eps, StopRule::AitkenPrev).converged &&
                        !aitken_converged(prefix, eps, StopRule::AitkenCurrent).converged) {
                        strict_ok = false;
                        break;
                    }
            }
        check("7e.", "previous-iterate stopping implies current-iterate stopping on all "
                     "recorded traces",
              strict_ok, fmt("%zu traces, 5 tolerances", traces.size()));
    }

    // 7f. agreement of the rank index with definition-level pair counting
    {
        long mismatches = 0, compared = 0;
        for (int n = 1; n <= 7; ++n) {
            const auto parts = all_partitions(n);
            for (const auto& a : parts)
                for (const auto& b : parts) {
                    ++compared;
                    if (std::fabs(adjusted_rand_index(a, b) - brute_ari(a, b)) > 1e-12)
                        ++mismatches;
                }
        }
        check("7f.", "adjusted rand index equals brute-force pair counting on every "
                     "partition pair up to n=7",
              mismatches == 0, fmt("%ld pairs compared, %ld mismatches", compared, mismatches));
    }

    // 7g. warping distance sanity on random integer series
    {
        Rng rng = make_rng(4004);
        bool ok = true;
        for (int trial = 0; trial < 1000 && ok; ++trial) {
            const int Ta = 5 + (int)(rng() % 26), Tb = 5 + (int)(rng() % 26);
            std::vector<int> a((std::size_t)Ta), b((std::size_t)Tb);
            for (auto& v : a) v = (int)(rng() % 11);
            for (auto& v : b) v = (int)(rng() % 11);
            const CountSeries sa{a}, sb{b};
            const double dab = dtw_distance(sa, sb);
            ok = ok && dab >= 0.0 && dab == dtw_distance(sb, sa) &&
                 dtw_distance(sa, sa) == 0.0;
            if (Ta == Tb) {
                double l1 = 0.0;
                for (int t = 0; t < Ta; ++t)
                    l1 += std::fabs((double)a[(std::size_t)t] - b[(std::size_t)t]);
                ok = ok && dab <= l1 + 1e-12;
            }
        }
        check("7g.", "warping distance: symmetry, identity, and the elementwise L1 bound "
                     "on 1000 random pairs",
              ok, "1000 pairs");
    }

    // 8. the batch study command is byte-deterministic under a fixed seed
    {
        std::string bin;
        if (const char* env = std::getenv("INARMIX_BIN")) bin = env;
        if (bin.empty() || !fs::exists(bin)) {
            for (const char* guess : {"./tools/inarmix", "../tools/inarmix", "build/tools/inarmix"})
                if (fs::exists(guess)) {
                    bin = guess;
                    break;
                }
        }
        if (bin.empty()) {
            check("8.", "study command byte-identical across two seeded runs", false,
                  "inarmix binary not found (set INARMIX_BIN)");
        } else {
            const auto stamp = std::chrono::system_clock::now().time_since_epoch().count();
            const fs::path work =
                fs::temp_directory_path() / ("inarmix_accept_" + std::to_string(stamp));
            fs::create_directories(work);
            const std::string args = "study poisson-very-easy --reps 2 --seed 11 --out ";
            const int rc1 = run_cli(bin, args + (work / "a").string(), work / "a.log");
            const int rc2 = run_cli(bin, args + (work / "b").string(), work / "b.log");
            bool same = rc1 == 0 && rc2 == 0;
            for (const char* f :
                 {"poisson-very-easy.report.json", "poisson-very-easy.table.txt",
                  "study_summary.json"})
                same = same && slurp(work / "a" / f) == slurp(work / "b" / f);
            check("8.", "study command byte-identical across two seeded runs", same,
                  fmt("exit codes %d/%d, three artifacts compared", rc1, rc2));
            fs::remove_all(work);
        }
    }

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance line(s) failed\n", g_failures);
    return 1;
}
