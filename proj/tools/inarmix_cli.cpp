// inarmix: clusters panels of non-negative integer count series by fitting
// finite mixtures of INAR processes, with simulation, diagnostics, a
// DTW/fuzzy-C-medoids baseline, and a batch study driver.
//
// Exit codes: 0 success, 2 command-line error, 3 unreadable/unwritable file,
// 4 malformed input data, 5 every candidate model failed, 1 other error.

#include <inarmix/inarmix.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SeedOpt {
    std::uint64_t value = 1;
    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", value, "RNG seed (env INARMIX_SEED)")
            ->envname("INARMIX_SEED")
            ->capture_default_str();
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw inarmix::FileError("cannot create output directory: " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                c == '.')
                   ? c
                   : '_';
    return out.empty() ? std::string("scenario") : out;
}

// A scenario argument is either a builtin name or a path to a scenario JSON.
inarmix::ScenarioSpec resolve_scenario(const std::string& arg) {
    if (auto builtin = inarmix::find_scenario(arg)) return *builtin;
    if (fs::exists(arg)) return inarmix::scenario_from_json(inarmix::read_json_file(arg));
    std::string names;
    for (const auto& s : inarmix::builtin_scenarios()) {
        if (!names.empty()) names += ", ";
        names += s.name;
    }
    throw inarmix::FileError("unknown scenario '" + arg +
                             "' (not a builtin name or readable file); builtins: " + names);
}

std::vector<int> shift_labels(const std::vector<int>& labels, int delta) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] + delta;
    return out;
}

// ---- minimal SVG rendering for the diagnostic plots ------------------------

struct SvgCanvas {
    std::ostringstream body;
    double width, height, margin;
    double x0, x1, y0, y1;  // data ranges

    SvgCanvas(double w, double h, double m, double dx0, double dx1, double dy0, double dy1)
        : width(w), height(h), margin(m), x0(dx0), x1(dx1), y0(dy0), y1(dy1) {}

    double px(double x) const {
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin);
    }
    double py(double y) const {
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin);
    }
    void line(double xa, double ya, double xb, double yb, const char* stroke) {
        body << "<line x1='" << px(xa) << "' y1='" << py(ya) << "' x2='" << px(xb)
             << "' y2='" << py(yb) << "' stroke='" << stroke << "'/>\n";
    }
    void rect(double xa, double ya, double xb, double yb, const char* fill) {
        body << "<rect x='" << px(xa) << "' y='" << py(yb) << "' width='"
             << px(xb) - px(xa) << "' height='" << py(ya) - py(yb) << "' fill='" << fill
             << "' stroke='black'/>\n";
    }
    void circle(double x, double y, const char* fill) {
        body << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='2.5' fill='" << fill
             << "' fill-opacity='0.55'/>\n";
    }
    void text(double x, double y, const std::string& s) {
        body << "<text x='" << px(x) << "' y='" << py(y)
             << "' font-size='11' font-family='sans-serif' text-anchor='middle'>" << s
             << "</text>\n";
    }
    std::string render() const {
        std::ostringstream out;
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
            << height << "' viewBox='0 0 " << width << " " << height << "'>\n"
            << "<rect width='100%' height='100%' fill='white'/>\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string acf_boxplot_svg(const inarmix::AcfReport& acf) {
    SvgCanvas c(640, 400, 45, 0.5, acf.max_lag + 0.5, -1.05, 1.05);
    c.line(0.5, 0.0, acf.max_lag + 0.5, 0.0, "#999999");
    for (int lag = 1; lag <= acf.max_lag; ++lag) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < acf.acf.size(); ++i)
            if (!acf.constant[i]) vals.push_back(acf.acf[i][static_cast<std::size_t>(lag - 1)]);
        if (vals.empty()) continue;
        const double q1 = quantile(vals, 0.25), q2 = quantile(vals, 0.5),
                     q3 = quantile(vals, 0.75);
        const double lo = *std::min_element(vals.begin(), vals.end());
        const double hi = *std::max_element(vals.begin(), vals.end());
        const double x = lag, w = 0.3;
        c.line(x, lo, x, q1, "black");
        c.line(x, q3, x, hi, "black");
        c.rect(x - w, q1, x + w, q3, "#c6dbef");
        c.line(x - w, q2, x + w, q2, "black");
        c.text(x, -1.22, std::to_string(lag));
    }
    c.text((acf.max_lag + 1) / 2.0, 1.12, "autocorrelation by lag");
    return c.render();
}

std::string dispersion_svg(const inarmix::DispersionReport& rep) {
    double mmax = 1.0, vmax = 1.0;
    for (double m : rep.mean) mmax = std::max(mmax, m);
    for (double v : rep.variance) vmax = std::max(vmax, v);
    SvgCanvas c(640, 400, 45, 0.0, mmax * 1.05, 0.0, vmax * 1.05);
    c.line(0.0, 0.0, std::min(mmax, vmax), std::min(mmax, vmax), "#cc0000");
    for (std::size_t i = 0; i < rep.mean.size(); ++i)
        c.circle(rep.mean[i], rep.variance[i], "#3366cc");
    c.text(mmax * 0.5, vmax * 1.1, "per-series variance vs mean (line: variance = mean)");
    return c.render();
}

// ---- shared fit/baseline output plumbing ------------------------------------

void write_fit_outputs(const std::string& outdir, const inarmix::PanelFile& pf,
                       const inarmix::SearchResult& search, const json& settings) {
    const inarmix::FitResult& best = search.best_fit();
    json doc{{"schema", "inarmix.fit.v1"},
             {"settings", settings},
             {"n_series", pf.panel.size()},
             {"search", inarmix::to_json(search)}};
    inarmix::write_json_file(join_path(outdir, "fit.json"), doc);
    inarmix::write_labels_csv(join_path(outdir, "labels.csv"), pf.ids,
                              shift_labels(best.map_labels, 1));
    inarmix::write_responsibilities_csv(join_path(outdir, "responsibilities.csv"), pf.ids,
                                        best.resp);
    inarmix::write_profiles_csv(join_path(outdir, "profiles.csv"), pf.panel, best.map_labels,
                                static_cast<int>(best.model.order()));

    std::ostringstream bic;
    bic << "structure,ok,loglik,rho,bic,iterations,converged,error\n";
    bic.precision(10);
    for (const auto& row : search.rows) {
        bic << row.structure.label() << "," << (row.ok ? 1 : 0) << ",";
        if (row.ok)
            bic << row.loglik << "," << row.rho << "," << row.bic << "," << row.iterations
                << "," << (row.converged ? 1 : 0) << ",";
        else
            bic << ",,,,," << '"' << row.error << '"';
        bic << "\n";
    }
    inarmix::write_text_file(join_path(outdir, "bic.csv"), bic.str());
}

void print_search_summary(const inarmix::SearchResult& search) {
    std::printf("%-28s %14s %6s %14s %5s\n", "structure", "loglik", "rho", "bic", "conv");
    for (const auto& row : search.rows) {
        if (row.ok)
            std::printf("%-28s %14.3f %6d %14.3f %5s\n", row.structure.label().c_str(),
                        row.loglik, row.rho, row.bic, row.converged ? "yes" : "no");
        else
            std::printf("%-28s failed: %s\n", row.structure.label().c_str(),
                        row.error.c_str());
    }
    const auto& best = search.best_row();
    std::printf("\nbest: %s (bic %.3f)\n", best.structure.label().c_str(), best.bic);
    const inarmix::MixtureModel& m = search.best_fit().model;
    for (std::size_t g = 0; g < m.components.size(); ++g) {
        const auto& c = m.components[g];
        std::printf("  component %zu: lag=%d weight=%.4f alpha=%.4f lambda=%.4f",
                    g + 1, c.spec.lag, m.weights[g], c.params.alpha,
                    c.params.innovation.lambda);
        if (c.spec.family == inarmix::Family::NegativeBinomial)
            std::printf(" phi=%.4f", c.params.innovation.phi);
        std::printf("\n");
    }
}

// ---- subcommands ------------------------------------------------------------

int cmd_simulate(const std::string& scenario_arg, int reps, std::uint64_t seed,
                 const std::string& outdir) {
    const inarmix::ScenarioSpec spec = resolve_scenario(scenario_arg);
    if (reps < 0) reps = spec.default_replications;
    ensure_dir(outdir);

    json files = json::array();
    for (int r = 0; r < reps; ++r) {
        inarmix::Rng rng = inarmix::make_rng(inarmix::derive_seed(seed, static_cast<std::uint64_t>(r)), 0);
        const inarmix::LabeledPanel lp = inarmix::simulate_scenario_panel(spec, rng);
        std::vector<std::string> ids;
        for (int i = 1; i <= spec.n; ++i) ids.push_back("s" + std::to_string(i));
        char panel_name[32], labels_name[32];
        std::snprintf(panel_name, sizeof panel_name, "panel_%03d.csv", r + 1);
        std::snprintf(labels_name, sizeof labels_name, "labels_%03d.csv", r + 1);
        inarmix::write_panel_csv(join_path(outdir, panel_name), lp.panel, ids);
        inarmix::write_labels_csv(join_path(outdir, labels_name), ids,
                                  shift_labels(lp.labels, 1));
        files.push_back({{"panel", panel_name}, {"labels", labels_name}});
    }

    json comps = json::array();
    for (const auto& c : spec.components) {
        json jc{{"lag", c.spec.lag},
                {"weight", c.weight},
                {"alpha", c.alpha},
                {"lambda", c.lambda}};
        if (spec.family() == inarmix::Family::NegativeBinomial) jc["phi"] = c.phi;
        comps.push_back(std::move(jc));
    }
    inarmix::write_json_file(join_path(outdir, "truth.json"),
                             json{{"schema", "inarmix.sim.v1"},
                                  {"scenario", spec.name},
                                  {"family", inarmix::family_name(spec.family())},
                                  {"n", spec.n},
                                  {"T", spec.T},
                                  {"seed", seed},
                                  {"replications", reps},
                                  {"components", std::move(comps)},
                                  {"files", std::move(files)}});
    std::printf("wrote %d panel(s) for scenario %s to %s\n", reps, spec.name.c_str(),
                outdir.c_str());
    return 0;
}

int cmd_diagnose(const std::string& panel_path, int max_lag, bool complete_only, bool svg,
                 const std::string& outdir) {
    const inarmix::PanelFile pf = inarmix::read_panel_csv(panel_path, complete_only);
    const inarmix::AcfReport acf = inarmix::acf_panel(pf.panel, max_lag);
    const inarmix::DispersionReport disp = inarmix::dispersion_diagnostic(pf.panel);
    ensure_dir(outdir);

    std::ostringstream acf_csv;
    acf_csv << "id,lag,acf,constant_series\n";
    acf_csv.precision(10);
    for (std::size_t i = 0; i < pf.panel.size(); ++i)
        for (int lag = 1; lag <= acf.max_lag; ++lag)
            acf_csv << pf.ids[i] << "," << lag << ","
                    << acf.acf[i][static_cast<std::size_t>(lag - 1)] << ","
                    << (acf.constant[i] ? 1 : 0) << "\n";
    inarmix::write_text_file(join_path(outdir, "acf.csv"), acf_csv.str());

    std::ostringstream disp_csv;
    disp_csv << "id,mean,variance,ratio,ref_variance\n";
    disp_csv.precision(10);
    for (std::size_t i = 0; i < pf.panel.size(); ++i)
        disp_csv << pf.ids[i] << "," << disp.mean[i] << "," << disp.variance[i] << ","
                 << disp.ratio[i] << "," << disp.mean[i] << "\n";
    inarmix::write_text_file(join_path(outdir, "dispersion.csv"), disp_csv.str());

    const char* verdict = disp.overdispersed ? "overdispersed" : "equidispersed";
    inarmix::write_json_file(
        join_path(outdir, "summary.json"),
        json{{"schema", "inarmix.diagnose.v1"},
             {"n_series", pf.panel.size()},
             {"max_lag", acf.max_lag},
             {"median_abs_acf", acf.median_abs_acf},
             {"suggested_lags", {acf.suggested_lags.first, acf.suggested_lags.second}},
             {"dispersion",
              {{"median_ratio", disp.median_ratio},
               {"threshold", disp.threshold},
               {"verdict", verdict}}}});

    if (svg) {
        inarmix::write_text_file(join_path(outdir, "acf_boxplot.svg"), acf_boxplot_svg(acf));
        inarmix::write_text_file(join_path(outdir, "dispersion.svg"), dispersion_svg(disp));
    }
    std::printf("n_series=%zu suggested_lags=(%d,%d) dispersion=%s (median ratio %.3f)\n",
                pf.panel.size(), acf.suggested_lags.first, acf.suggested_lags.second,
                verdict, disp.median_ratio);
    return 0;
}

int cmd_fit(const std::string& panel_path, std::vector<int> lags, std::vector<int> g_range,
            const std::string& h_rule, const std::string& family_arg, double epsilon,
            int max_iters, bool complete_only, std::uint64_t seed,
            const std::string& outdir) {
    const inarmix::PanelFile pf = inarmix::read_panel_csv(panel_path, complete_only);

    std::string family_resolved = family_arg;
    if (family_arg == "auto")
        family_resolved =
            inarmix::dispersion_diagnostic(pf.panel).overdispersed ? "nb" : "poisson";
    const inarmix::Family family = family_resolved == "nb"
                                       ? inarmix::Family::NegativeBinomial
                                       : inarmix::Family::Poisson;

    if (lags.empty()) {
        const auto acf = inarmix::acf_panel(pf.panel, 10);
        lags = {acf.suggested_lags.first, acf.suggested_lags.second};
        std::printf("lags not given; using (%d,%d) from the autocorrelation screen\n",
                    lags[0], lags[1]);
    }

    inarmix::ModelGrid grid;
    grid.lag_low = lags[0];
    grid.lag_high = lags[1];
    grid.G_min = g_range[0];
    grid.G_max = g_range[1];
    grid.h_rule = h_rule == "full" ? inarmix::ModelGrid::HRule::Full
                                   : inarmix::ModelGrid::HRule::ZeroOne;
    grid.family = family;
    grid.validate();

    inarmix::SearchOptions opts;
    opts.em.epsilon = epsilon;
    opts.em.max_iters = max_iters;
    inarmix::Rng rng = inarmix::make_rng(seed);
    const inarmix::SearchResult search = inarmix::model_search(pf.panel, grid, opts, rng);

    ensure_dir(outdir);
    write_fit_outputs(outdir, pf, search,
                      json{{"input", panel_path},
                           {"complete_only", complete_only},
                           {"family_requested", family_arg},
                           {"family", family_resolved},
                           {"lags", lags},
                           {"G_range", g_range},
                           {"h_rule", h_rule},
                           {"epsilon", epsilon},
                           {"max_iters", max_iters},
                           {"seed", seed}});
    print_search_summary(search);
    return 0;
}

int cmd_eval(const std::string& true_path, const std::string& pred_path,
             const std::string& out_path) {
    const inarmix::LabelsFile truth = inarmix::read_labels_csv(true_path);
    const inarmix::LabelsFile pred = inarmix::read_labels_csv(pred_path);
    if (truth.labels.size() != pred.labels.size())
        throw inarmix::ParseError("label files disagree on length: " +
                                  std::to_string(truth.labels.size()) + " vs " +
                                  std::to_string(pred.labels.size()));

    // Align by id when both files carry the same unique ids; positional otherwise.
    std::vector<int> pred_aligned = pred.labels;
    std::map<std::string, std::size_t> pred_index;
    bool unique = true;
    for (std::size_t i = 0; i < pred.ids.size(); ++i)
        unique = pred_index.emplace(pred.ids[i], i).second && unique;
    if (unique && pred_index.size() == truth.ids.size()) {
        bool all_found = true;
        std::vector<int> by_id(truth.labels.size());
        for (std::size_t i = 0; i < truth.ids.size(); ++i) {
            auto it = pred_index.find(truth.ids[i]);
            if (it == pred_index.end()) {
                all_found = false;
                break;
            }
            by_id[i] = pred.labels[it->second];
        }
        if (all_found) pred_aligned = std::move(by_id);
    }

    const inarmix::CrossTab ct = inarmix::cross_tabulate(truth.labels, pred_aligned);
    const double ari = inarmix::adjusted_rand_index(ct);
    const double ri = inarmix::rand_index(truth.labels, pred_aligned);
    const json doc{{"schema", "inarmix.eval.v1"},
                   {"n", truth.labels.size()},
                   {"ari", ari},
                   {"rand_index", ri},
                   {"crosstab", inarmix::to_json(ct)}};
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        inarmix::write_json_file(out_path, doc);
        std::printf("ari=%.6f rand_index=%.6f (n=%zu) -> %s\n", ari, ri,
                    truth.labels.size(), out_path.c_str());
    }
    return 0;
}

int cmd_baseline(const std::string& panel_path, std::vector<int> g_range, int starts,
                 double fuzziness, double tol, int max_iters, bool complete_only,
                 std::uint64_t seed, const std::string& outdir) {
    const inarmix::PanelFile pf = inarmix::read_panel_csv(panel_path, complete_only);
    inarmix::FcmddConfig cfg;
    cfg.random_starts = starts;
    cfg.fuzziness = fuzziness;
    cfg.tolerance = tol;
    cfg.max_iters = max_iters;
    inarmix::Rng rng = inarmix::make_rng(seed);
    const std::vector<double> dist = inarmix::dtw_distance_matrix(pf.panel);
    const inarmix::FcmddSelection sel = inarmix::fcmdd_select_matrix(
        dist, pf.panel.size(), g_range[0], g_range[1], cfg, rng);
    const inarmix::FcmddResult& fit = sel.fit;

    ensure_dir(outdir);
    json validity = json::array();
    for (const auto& [G, idx] : sel.validity) validity.push_back({{"G", G}, {"index", idx}});
    json medoids = json::array();
    for (int m : fit.medoids) medoids.push_back(pf.ids[static_cast<std::size_t>(m)]);
    inarmix::write_json_file(join_path(outdir, "baseline.json"),
                             json{{"schema", "inarmix.baseline.v1"},
                                  {"settings",
                                   {{"input", panel_path},
                                    {"complete_only", complete_only},
                                    {"G_range", g_range},
                                    {"starts", starts},
                                    {"fuzziness", fuzziness},
                                    {"tol", tol},
                                    {"max_iters", max_iters},
                                    {"seed", seed}}},
                                  {"selected_G", sel.G},
                                  {"objective", fit.objective},
                                  {"iterations", fit.iterations},
                                  {"converged", fit.converged},
                                  {"medoids", std::move(medoids)},
                                  {"validity", std::move(validity)}});

    const std::vector<int> labels = fit.labels();
    inarmix::write_labels_csv(join_path(outdir, "labels.csv"), pf.ids,
                              shift_labels(labels, 1));
    std::ostringstream mem;
    mem << "id";
    for (std::size_t g = 0; g < fit.G; ++g) mem << ",u" << (g + 1);
    mem << "\n";
    mem.precision(12);
    for (std::size_t i = 0; i < fit.n; ++i) {
        mem << pf.ids[i];
        for (std::size_t g = 0; g < fit.G; ++g) mem << "," << fit.u(i, g);
        mem << "\n";
    }
    inarmix::write_text_file(join_path(outdir, "membership.csv"), mem.str());
    inarmix::write_profiles_csv(join_path(outdir, "profiles.csv"), pf.panel, labels,
                                static_cast<int>(fit.G));
    std::printf("selected G=%d objective=%.4f converged=%s\n", sel.G, fit.objective,
                fit.converged ? "yes" : "no");
    return 0;
}

int cmd_study(const std::vector<std::string>& scenario_args, int reps, bool baseline,
              double epsilon, unsigned threads, std::vector<int> fcmdd_g_range,
              std::uint64_t seed, const std::string& outdir) {
    std::vector<inarmix::ScenarioSpec> specs;
    if (scenario_args.empty())
        specs = inarmix::builtin_scenarios();
    else
        for (const auto& a : scenario_args) specs.push_back(resolve_scenario(a));

    ensure_dir(outdir);
    json summary_rows = json::array();
    for (const auto& spec : specs) {
        inarmix::StudyOptions opts;
        opts.seed = seed;
        opts.replications = reps;
        opts.baseline = baseline;
        opts.em.epsilon = epsilon;
        opts.threads = threads;
        opts.fcmdd_G_min = fcmdd_g_range[0];
        opts.fcmdd_G_max = fcmdd_g_range[1];
        const inarmix::ScenarioReport rep = inarmix::run_scenario(spec, opts);

        const std::string base = sanitize_name(spec.name);
        inarmix::write_json_file(join_path(outdir, base + ".report.json"),
                                 inarmix::to_json(rep));
        const std::string table = inarmix::format_report_table(rep);
        inarmix::write_text_file(join_path(outdir, base + ".table.txt"), table);
        std::fputs(table.c_str(), stdout);
        std::fputs("\n", stdout);

        json row{{"scenario", rep.scenario},
                 {"replications", rep.replications_completed},
                 {"mean_ari", rep.mean_ari},
                 {"sd_ari", rep.sd_ari},
                 {"mean_rand", rep.mean_rand},
                 {"modal_structure", rep.modal_structure},
                 {"report", base + ".report.json"}};
        if (rep.has_baseline) {
            row["fcmdd_mean_ari"] = rep.fcmdd_mean_ari;
            row["fcmdd_sd_ari"] = rep.fcmdd_sd_ari;
        }
        summary_rows.push_back(std::move(row));
    }
    inarmix::write_json_file(join_path(outdir, "study_summary.json"),
                             json{{"schema", "inarmix.study-summary.v1"},
                                  {"seed", seed},
                                  {"baseline", baseline},
                                  {"epsilon", epsilon},
                                  {"scenarios", std::move(summary_rows)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inarmix: model-based clustering of count time series panels"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read option defaults from an INI file");
    app.get_formatter()->column_width(34);

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw labeled panels from a scenario");
    std::string sim_scenario;
    int sim_reps = -1;  // -1: use the scenario default
    std::string sim_out = "sim-out";
    SeedOpt sim_seed;
    sim->add_option("scenario", sim_scenario,
                    "builtin scenario name or scenario JSON file")
        ->required();
    sim->add_option("--reps", sim_reps, "replications (0 writes the manifest only)");
    sim->add_option("--out", sim_out, "output directory")->capture_default_str();
    sim_seed.attach(sim);

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "autocorrelation and dispersion screens");
    std::string diag_panel, diag_out = "diagnose-out";
    int diag_max_lag = 10;
    bool diag_complete = false, diag_svg = false;
    diag->add_option("panel", diag_panel, "panel CSV")->required();
    diag->add_option("--max-lag", diag_max_lag, "largest lag to screen")
        ->check(CLI::Range(2, 10000))
        ->capture_default_str();
    diag->add_flag("--complete-only", diag_complete, "drop series shorter than the longest");
    diag->add_flag("--svg", diag_svg, "also render static SVG plots");
    diag->add_option("--out", diag_out, "output directory")->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "BIC model search over mixture structures");
    std::string fit_panel, fit_out = "fit-out", fit_h_rule = "zero-one",
                fit_family = "auto";
    std::vector<int> fit_lags, fit_g_range{1, 3};
    double fit_epsilon = 1e-2;
    int fit_max_iters = 500;
    bool fit_complete = false;
    SeedOpt fit_seed;
    fit->add_option("panel", fit_panel, "panel CSV")->required();
    fit->add_option("--lags", fit_lags, "low,high lag pair (default: autocorrelation screen)")
        ->delimiter(',')
        ->expected(2);
    fit->add_option("--G-range", fit_g_range, "min,max number of components")
        ->delimiter(',')
        ->expected(2)
        ->capture_default_str();
    fit->add_option("--H-rule", fit_h_rule, "high-lag count rule per G")
        ->check(CLI::IsMember({"zero-one", "full"}))
        ->capture_default_str();
    fit->add_option("--family", fit_family, "innovation family")
        ->check(CLI::IsMember({"auto", "poisson", "nb"}))
        ->capture_default_str();
    fit->add_option("--epsilon", fit_epsilon, "EM stopping tolerance")
        ->capture_default_str();
    fit->add_option("--max-iters", fit_max_iters, "EM iteration cap")->capture_default_str();
    fit->add_flag("--complete-only", fit_complete, "drop series shorter than the longest");
    fit->add_option("--out", fit_out, "output directory")->capture_default_str();
    fit_seed.attach(fit);

    // eval
    auto* ev = app.add_subcommand("eval", "compare two label files (ARI, Rand, cross-tab)");
    std::string ev_true, ev_pred, ev_out;
    ev->add_option("truth", ev_true, "reference labels CSV")->required();
    ev->add_option("predicted", ev_pred, "predicted labels CSV")->required();
    ev->add_option("--out", ev_out, "write JSON here instead of stdout");

    // baseline
    auto* base = app.add_subcommand("baseline", "DTW + fuzzy C-medoids clustering");
    std::string base_panel, base_out = "baseline-out";
    std::vector<int> base_g_range{2, 3};
    int base_starts = 5, base_max_iters = 100;
    double base_fuzziness = 2.0, base_tol = 1e-2;
    bool base_complete = false;
    SeedOpt base_seed;
    base->add_option("panel", base_panel, "panel CSV")->required();
    base->add_option("--G-range", base_g_range, "min,max number of clusters (min >= 2)")
        ->delimiter(',')
        ->expected(2)
        ->capture_default_str();
    base->add_option("--starts", base_starts, "random medoid restarts")
        ->capture_default_str();
    base->add_option("--fuzziness", base_fuzziness, "membership exponent m > 1")
        ->capture_default_str();
    base->add_option("--tol", base_tol, "absolute objective tolerance")
        ->capture_default_str();
    base->add_option("--max-iters", base_max_iters, "iteration cap per start")
        ->capture_default_str();
    base->add_flag("--complete-only", base_complete, "drop series shorter than the longest");
    base->add_option("--out", base_out, "output directory")->capture_default_str();
    base_seed.attach(base);

    // study
    auto* study = app.add_subcommand("study", "run simulation scenarios end to end");
    std::vector<std::string> study_scenarios;
    std::string study_out = "study-out";
    int study_reps = 0;  // 0: scenario default
    bool study_baseline = false, study_list = false;
    double study_epsilon = 1e-1;
    unsigned study_threads = 0;
    std::vector<int> study_fcmdd_g{2, 3};
    SeedOpt study_seed;
    study->add_option("scenarios", study_scenarios,
                      "builtin names or scenario JSON files (default: all builtins)");
    study->add_option("--reps", study_reps, "override scenario replication counts");
    study->add_flag("--baseline", study_baseline, "also run the DTW/FCMdd baseline");
    study->add_option("--epsilon", study_epsilon, "EM stopping tolerance")
        ->capture_default_str();
    study->add_option("--threads", study_threads,
                      "worker threads (0 = all hardware threads)");
    study->add_option("--fcmdd-G-range", study_fcmdd_g, "baseline cluster range")
        ->delimiter(',')
        ->expected(2)
        ->capture_default_str();
    study->add_flag("--list", study_list, "list builtin scenarios and exit");
    study->add_option("--out", study_out, "output directory")->capture_default_str();
    study_seed.attach(study);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_scenario, sim_reps, sim_seed.value, sim_out);
        if (diag->parsed())
            return cmd_diagnose(diag_panel, diag_max_lag, diag_complete, diag_svg, diag_out);
        if (fit->parsed())
            return cmd_fit(fit_panel, fit_lags, fit_g_range, fit_h_rule, fit_family,
                           fit_epsilon, fit_max_iters, fit_complete, fit_seed.value,
                           fit_out);
        if (ev->parsed()) return cmd_eval(ev_true, ev_pred, ev_out);
        if (base->parsed())
            return cmd_baseline(base_panel, base_g_range, base_starts, base_fuzziness,
                                base_tol, base_max_iters, base_complete, base_seed.value,
                                base_out);
        if (study->parsed()) {
            if (study_list) {
                for (const auto& s : inarmix::builtin_scenarios())
                    std::printf("%-22s n=%d T=%d family=%s reps=%d\n", s.name.c_str(), s.n,
                                s.T, inarmix::family_name(s.family()),
                                s.default_replications);
                return 0;
            }
            return cmd_study(study_scenarios, study_reps, study_baseline, study_epsilon,
                             study_threads, study_fcmdd_g, study_seed.value, study_out);
        }
    } catch (const inarmix::FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const inarmix::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const inarmix::AllCandidatesFailedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
