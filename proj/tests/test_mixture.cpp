#include <inarmix/inarmix.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace inarmix;

namespace {

Panel simulate_panel(const std::vector<Component>& comps, const std::vector<int>& sizes,
                     int T, Rng& rng) {
    Panel panel;
    for (std::size_t g = 0; g < comps.size(); ++g)
        for (int i = 0; i < sizes[g]; ++i)
            panel.push_back(simulate_inar(comps[g].spec, comps[g].params, T, rng));
    return panel;
}

MixtureModel two_component_poisson(double w1, const ComponentParams& p1,
                                   const ComponentParams& p2, int lag = 1) {
    MixtureModel m;
    m.components = {{{lag, Family::Poisson}, p1}, {{lag, Family::Poisson}, p2}};
    m.weights = {w1, 1.0 - w1};
    return m;
}

}  // namespace

TEST_CASE("e-step basics") {
    Rng rng = make_rng(3);
    const ComponentParams pa{0.3, InnovationModel::poisson(1.0)};
    const ComponentParams pb{0.6, InnovationModel::poisson(6.0)};
    const Panel panel = simulate_panel({{{1, Family::Poisson}, pa}, {{1, Family::Poisson}, pb}},
                                       {6, 6}, 30, rng);

    SECTION("single component gets responsibility one and the summed log-likelihood") {
        MixtureModel m;
        m.components = {{{1, Family::Poisson}, pa}};
        m.weights = {1.0};
        const EStepResult es = e_step(panel, m);
        double expect = 0.0;
        for (const auto& s : panel) expect += series_loglik(s, m.components[0].spec, pa);
        CHECK(es.loglik == Catch::Approx(expect).epsilon(1e-10));
        for (std::size_t i = 0; i < es.resp.n; ++i)
            CHECK(es.resp.at(i, 0) == Catch::Approx(1.0).margin(1e-15));
    }

    SECTION("identical components split by the prior") {
        const MixtureModel m = two_component_poisson(0.3, pa, pa);
        const EStepResult es = e_step(panel, m);
        for (std::size_t i = 0; i < es.resp.n; ++i) {
            CHECK(es.resp.at(i, 0) == Catch::Approx(0.3).margin(1e-12));
            CHECK(es.resp.at(i, 1) == Catch::Approx(0.7).margin(1e-12));
        }
    }

    SECTION("rows sum to one") {
        const MixtureModel m = two_component_poisson(0.4, pa, pb);
        const EStepResult es = e_step(panel, m);
        for (std::size_t i = 0; i < es.resp.n; ++i)
            CHECK(std::fabs(es.resp.row_sum(i) - 1.0) <= 1e-10);
    }

    SECTION("a series impossible under every component raises the degenerate error") {
        MixtureModel m;
        m.components = {{{1, Family::Poisson}, ComponentParams{1.0, InnovationModel::poisson(1.0)}}};
        m.weights = {1.0};
        Panel bad;
        bad.push_back(CountSeries{{5, 0}});  // thinning of 5 with alpha=1 cannot reach 0
        CHECK_THROWS_AS(e_step(bad, m), DegenerateFitError);
    }
}

TEST_CASE("separated truth yields near-certain responsibilities") {
    // stationary means 8.75 vs 1.67 keep the two groups far apart
    Rng rng = make_rng(17);
    const ComponentParams p1{0.20, InnovationModel::poisson(7.0)};
    const ComponentParams p2{0.70, InnovationModel::poisson(0.5)};
    const std::vector<int> sizes{75, 125};
    const Panel panel =
        simulate_panel({{{5, Family::Poisson}, p1}, {{5, Family::Poisson}, p2}}, sizes, 50, rng);
    MixtureModel truth;
    truth.components = {{{5, Family::Poisson}, p1}, {{5, Family::Poisson}, p2}};
    truth.weights = {0.375, 0.625};
    const EStepResult es = e_step(panel, truth);
    double mean_max = 0.0;
    for (std::size_t i = 0; i < es.resp.n; ++i)
        mean_max += std::max(es.resp.at(i, 0), es.resp.at(i, 1));
    mean_max /= (double)es.resp.n;
    CHECK(mean_max >= 0.99);

    SECTION("MAP labels recover the construction") {
        const std::vector<int> labels = es.resp.map_labels();
        std::vector<int> truth_labels(200, 0);
        for (int i = 75; i < 200; ++i) truth_labels[(std::size_t)i] = 1;
        CHECK(adjusted_rand_index(truth_labels, labels) == Catch::Approx(1.0));
    }
}

TEST_CASE("m-step weights are floored column means") {
    SECTION("exact column means") {
        Responsibilities r(8, 2);
        for (std::size_t i = 0; i < 8; ++i) {
            r.at(i, 0) = i < 3 ? 1.0 : 0.0;
            r.at(i, 1) = i < 3 ? 0.0 : 1.0;
        }
        const std::vector<double> w = m_step_weights(r);
        CHECK(w[0] == Catch::Approx(0.375).epsilon(1e-14));
        CHECK(w[1] == Catch::Approx(0.625).epsilon(1e-14));
    }
    SECTION("column sums 75/125 over n=200") {
        Responsibilities r(200, 2);
        for (std::size_t i = 0; i < 200; ++i) {
            r.at(i, 0) = i < 75 ? 1.0 : 0.0;
            r.at(i, 1) = 1.0 - r.at(i, 0);
        }
        const std::vector<double> w = m_step_weights(r);
        CHECK(w[0] == Catch::Approx(0.375).epsilon(1e-14));
        CHECK(w[1] == Catch::Approx(0.625).epsilon(1e-14));
    }
    SECTION("an empty column is clipped by the floor, and weights still sum to one") {
        Responsibilities r(4, 2);
        for (std::size_t i = 0; i < 4; ++i) r.at(i, 0) = 1.0;
        const std::vector<double> w = m_step_weights(r);
        CHECK(w[1] >= 1e-7);
        CHECK(w[1] <= 2e-6);
        CHECK(w[0] + w[1] == Catch::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("m-step component maximization") {
    Rng rng = make_rng(23);
    const ComponentSpec spec{1, Family::Poisson};
    const ComponentParams truth{0.5, InnovationModel::poisson(2.0)};
    Panel panel;
    for (int i = 0; i < 30; ++i) panel.push_back(simulate_inar(spec, truth, 40, rng));
    const std::vector<double> ones(panel.size(), 1.0);

    SECTION("zero total weight returns the start unchanged") {
        const std::vector<double> zeros(panel.size(), 0.0);
        const ComponentParams start{0.25, InnovationModel::poisson(5.0)};
        const MStepComponentResult res = m_step_component(panel, zeros, spec, start);
        CHECK(res.params.alpha == Catch::Approx(start.alpha));
        CHECK(res.params.innovation.lambda == Catch::Approx(start.innovation.lambda));
    }

    SECTION("the returned objective never falls below the start objective") {
        for (double a0 : {0.1, 0.5, 0.9})
            for (double l0 : {0.5, 2.0, 8.0}) {
                const ComponentParams start{a0, InnovationModel::poisson(l0)};
                detail::PanelLikelihoodCache cache(panel);
                const detail::WeightedCounts wc =
                    detail::pool_counts(cache.for_lag(spec.lag), ones, cache.max_count());
                const double q_start = detail::weighted_loglik(wc, start);
                const MStepComponentResult res = m_step_component(panel, ones, spec, start);
                CHECK(res.objective >= q_start - 1e-9);
            }
    }

    SECTION("alpha-free data reduces to the Poisson mean") {
        Rng r2 = make_rng(29);
        const ComponentParams gen{0.0, InnovationModel::poisson(3.0)};
        Panel flat;
        for (int i = 0; i < 20; ++i) flat.push_back(simulate_inar(spec, gen, 60, r2));
        double grand = 0.0;
        long count = 0;
        for (const auto& s : flat)
            for (int t = 0; t < s.length(); ++t) grand += s[t], ++count;
        grand /= (double)count;
        const ComponentParams start{0.3, InnovationModel::poisson(1.0)};
        const MStepComponentResult res =
            m_step_component(flat, std::vector<double>(flat.size(), 1.0), spec, start);
        // with alpha pushed to ~0 the innovation mean must match the sample mean
        CHECK(res.params.alpha <= 0.08);
        CHECK(res.params.innovation.lambda == Catch::Approx(grand).margin(0.25));
    }

    SECTION("recovers an overdispersed component given oracle weights") {
        Rng r3 = make_rng(31);
        const ComponentSpec nbspec{2, Family::NegativeBinomial};
        const ComponentParams nbtruth{0.8, InnovationModel::negative_binomial(1.0, 4.0)};
        Panel nbpanel;
        for (int i = 0; i < 150; ++i) nbpanel.push_back(simulate_inar(nbspec, nbtruth, 30, r3));
        const ComponentParams start{0.5, InnovationModel::negative_binomial(2.0, 2.0)};
        const MStepComponentResult res = m_step_component(
            nbpanel, std::vector<double>(nbpanel.size(), 1.0), nbspec, start);
        CHECK(res.params.alpha == Catch::Approx(0.80).margin(0.05));
        CHECK(res.params.innovation.lambda == Catch::Approx(1.0).margin(0.15));
        CHECK(res.params.innovation.phi == Catch::Approx(4.0).margin(1.0));
    }
}

TEST_CASE("aitken stopping rule") {
    SECTION("flat trace converges through the zero-progress guard") {
        const AitkenState st = aitken_converged({-100.0, -100.0, -100.0}, 0.1);
        CHECK(st.converged);
    }
    SECTION("worked example: a=0.5, asymptote -80, gap 10") {
        const AitkenState st = aitken_converged({-100.0, -90.0, -85.0}, 0.1);
        CHECK(st.a == Catch::Approx(0.5).epsilon(1e-12));
        CHECK(st.loglik_inf == Catch::Approx(-80.0).epsilon(1e-12));
        CHECK_FALSE(st.converged);
    }
    SECTION("near-flat tail converges") {
        CHECK(aitken_converged({-100.0, -90.0, -89.999999}, 0.1).converged);
    }
    SECTION("acceleration ratio at or above one never converges") {
        const AitkenState st = aitken_converged({-100.0, -90.0, -80.0}, 1000.0);
        CHECK_FALSE(st.converged);
    }
    SECTION("too-short traces never converge") {
        CHECK_FALSE(aitken_converged({-5.0, -4.0}, 10.0).converged);
    }
    SECTION("previous-iterate gap rule is at least as strict as the current-iterate rule") {
        Rng rng = make_rng(37);
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<double> trace{-200.0 - 50.0 * uniform01(rng)};
            const int len = 3 + (int)(rng() % 8);
            double step = 5.0 + 20.0 * uniform01(rng);
            const double decay = 0.2 + 0.7 * uniform01(rng);
            for (int k = 1; k < len; ++k) {
                trace.push_back(trace.back() + step);
                step *= decay;
            }
            const double eps = std::pow(10.0, -2.0 + 4.0 * uniform01(rng));
            if (aitken_converged(trace, eps, StopRule::AitkenPrev).converged)
                CHECK(aitken_converged(trace, eps, StopRule::AitkenCurrent).converged);
        }
    }
}

TEST_CASE("bic and parameter counts") {
    CHECK(free_parameter_count(1, Family::Poisson) == 2);
    CHECK(free_parameter_count(2, Family::Poisson) == 5);
    CHECK(free_parameter_count(2, Family::NegativeBinomial) == 7);
    CHECK(bic(0.0, 1, Family::Poisson, std::exp(1.0)) == Catch::Approx(-2.0).epsilon(1e-12));
    CHECK(bic(-50.0, 2, Family::Poisson, 10000.0) - bic(-50.0, 3, Family::Poisson, 10000.0) ==
          Catch::Approx(3.0 * std::log(10000.0)).epsilon(1e-12));
    CHECK_THROWS(bic(0.0, 2, 0.5));
    SECTION("fixed loglik, more parameters, strictly smaller bic") {
        for (int rho = 1; rho < 10; ++rho)
            CHECK(bic(-100.0, rho + 1, 200.0) < bic(-100.0, rho, 200.0));
    }
}

TEST_CASE("em fitting") {
    Rng rng = make_rng(41);
    const ComponentParams pa{0.2, InnovationModel::poisson(7.0)};
    const ComponentParams pb{0.7, InnovationModel::poisson(0.5)};
    const Panel panel = simulate_panel(
        {{{1, Family::Poisson}, pa}, {{1, Family::Poisson}, pb}}, {30, 50}, 40, rng);

    SECTION("single-component fit matches a grid-search oracle") {
        const ComponentSpec spec{1, Family::Poisson};
        Panel sub(panel.begin(), panel.begin() + 12);
        MixtureModel init;
        init.components = {{spec, ComponentParams{0.5, InnovationModel::poisson(3.0)}}};
        init.weights = {1.0};
        const FitResult fit = fit_em(sub, init);

        auto loglik_at = [&](double a, double l) {
            if (a < 0.0 || a > 1.0 || l <= 0.0) return neg_inf;
            const ComponentParams cand{a, InnovationModel::poisson(l)};
            double ll = 0.0;
            for (const auto& s : sub) ll += series_loglik(s, spec, cand);
            return ll;
        };
        // shrinking grid search, independent of the fitted values
        double ca = 0.475, cl = 6.0, ha = 0.475, hl = 5.9;
        double best = neg_inf, best_a = ca, best_l = cl;
        for (int stage = 0; stage < 4; ++stage) {
            best = neg_inf;
            for (int ia = -12; ia <= 12; ++ia)
                for (int il = -12; il <= 12; ++il) {
                    const double a = ca + ia * ha / 12.0, l = cl + il * hl / 12.0;
                    const double ll = loglik_at(a, l);
                    if (ll > best) best = ll, best_a = a, best_l = l;
                }
            ca = best_a, cl = best_l;
            ha /= 6.0, hl /= 6.0;
        }
        CHECK(fit.loglik == Catch::Approx(best).margin(1e-3));
        CHECK(fit.loglik >= best - 1e-3);
        CHECK(fit.model.components[0].params.alpha == Catch::Approx(best_a).margin(0.02));
        CHECK(fit.model.components[0].params.innovation.lambda ==
              Catch::Approx(best_l).margin(0.1));
        CHECK(fit.converged);
    }

    SECTION("monotone trace, normalized rows, consistent summary fields") {
        MixtureModel init = two_component_poisson(
            0.5, ComponentParams{0.4, InnovationModel::poisson(5.0)},
            ComponentParams{0.4, InnovationModel::poisson(1.0)});
        const FitResult fit = fit_em(panel, init);
        REQUIRE(fit.loglik_trace.size() >= 2);
        for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k)
            CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1] - 1e-6);
        CHECK(fit.loglik == Catch::Approx(fit.loglik_trace.back()));
        for (std::size_t i = 0; i < fit.resp.n; ++i)
            CHECK(std::fabs(fit.resp.row_sum(i) - 1.0) <= 1e-10);
        CHECK(fit.map_labels.size() == panel.size());
        CHECK(fit.bic == Catch::Approx(bic(fit.loglik, 2, Family::Poisson,
                                           (double)total_observations(panel))));

        SECTION("recovers the generating parameters") {
            // order by lambda to identify components
            const bool first_big = fit.model.components[0].params.innovation.lambda >
                                   fit.model.components[1].params.innovation.lambda;
            const auto& big = fit.model.components[first_big ? 0 : 1];
            const auto& small = fit.model.components[first_big ? 1 : 0];
            const double w_big = fit.model.weights[first_big ? 0 : 1];
            CHECK(big.params.innovation.lambda == Catch::Approx(7.0).margin(0.8));
            CHECK(big.params.alpha == Catch::Approx(0.2).margin(0.1));
            CHECK(small.params.innovation.lambda == Catch::Approx(0.5).margin(0.3));
            CHECK(small.params.alpha == Catch::Approx(0.7).margin(0.15));
            CHECK(w_big == Catch::Approx(30.0 / 80.0).margin(0.05));
        }
    }

    SECTION("permuting the initial components permutes the fit") {
        MixtureModel init = two_component_poisson(
            0.4, ComponentParams{0.4, InnovationModel::poisson(5.0)},
            ComponentParams{0.4, InnovationModel::poisson(1.0)});
        MixtureModel swapped = init;
        std::swap(swapped.components[0], swapped.components[1]);
        std::swap(swapped.weights[0], swapped.weights[1]);
        const FitResult a = fit_em(panel, init);
        const FitResult b = fit_em(panel, swapped);
        CHECK(a.loglik == Catch::Approx(b.loglik).margin(1e-8));
        CHECK(a.model.weights[0] == Catch::Approx(b.model.weights[1]).margin(1e-8));
        CHECK(a.model.components[0].params.innovation.lambda ==
              Catch::Approx(b.model.components[1].params.innovation.lambda).margin(1e-6));
    }

    SECTION("iteration cap marks the fit unconverged instead of erroring") {
        MixtureModel init = two_component_poisson(
            0.5, ComponentParams{0.4, InnovationModel::poisson(5.0)},
            ComponentParams{0.4, InnovationModel::poisson(1.0)});
        EmOptions opts;
        opts.max_iters = 1;
        opts.epsilon = 1e-12;
        const FitResult fit = fit_em(panel, init, opts);
        CHECK_FALSE(fit.converged);
        CHECK(fit.iterations == 1);
    }
}

TEST_CASE("mixture model validation") {
    MixtureModel m;
    m.components = {{{1, Family::Poisson}, ComponentParams{0.5, InnovationModel::poisson(1.0)}}};
    m.weights = {0.7};
    CHECK_THROWS(m.validate());  // weights must sum to one
    m.weights = {1.0};
    CHECK_NOTHROW(m.validate());
    m.weights = {0.5, 0.5};
    CHECK_THROWS(m.validate());  // size mismatch
}
