#ifndef INARMIX_IO_HPP
#define INARMIX_IO_HPP

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "baseline.hpp"
#include "selection.hpp"
#include "simstudy.hpp"

namespace inarmix {

/// File could not be opened for reading or writing.
class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

/// File opened but its content is malformed.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct PanelFile {
    Panel panel;
    std::vector<std::string> ids;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline bool parse_count(const std::string& cell, int& out) {
    if (cell.empty()) return false;
    std::size_t pos = 0;
    try {
        const long v = std::stol(cell, &pos);
        if (pos != cell.size() || v < 0 || v > INT32_MAX) return false;
        out = static_cast<int>(v);
        return true;
    } catch (...) {
        return false;
    }
}

} // namespace detail

/// Panel CSV: one series per row, first column an id, remaining columns
/// non-negative integer counts. Empty trailing cells shorten the series
/// (ragged panels); an optional header row is detected and skipped. With
/// complete_only, rows shorter than the longest are dropped.
inline PanelFile read_panel_csv(const std::string& path, bool complete_only = false) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open panel file: " + path);
    PanelFile out;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() < 2)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": a series row needs an id and at least one count");
        if (first) {
            first = false;
            bool header = false;
            int v;
            for (std::size_t c = 1; c < cells.size(); ++c)
                if (!cells[c].empty() && !detail::parse_count(cells[c], v)) {
                    header = true;
                    break;
                }
            if (header) continue;
        }
        std::vector<int> values;
        bool ended = false;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (cells[c].empty()) {
                ended = true;
                continue;
            }
            if (ended)
                throw ParseError(path + ":" + std::to_string(lineno) + ": column " +
                                 std::to_string(c + 1) + ": value after an empty cell");
            int v;
            if (!detail::parse_count(cells[c], v))
                throw ParseError(path + ":" + std::to_string(lineno) + ": column " +
                                 std::to_string(c + 1) + ": '" + cells[c] +
                                 "' is not a non-negative integer");
            values.push_back(v);
        }
        if (values.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": series has no counts");
        out.ids.push_back(cells[0]);
        out.panel.emplace_back(std::move(values));
    }
    if (out.panel.empty()) throw ParseError(path + ": no series found");
    if (complete_only) {
        int max_len = 0;
        for (const auto& s : out.panel) max_len = std::max(max_len, s.length());
        PanelFile filtered;
        for (std::size_t i = 0; i < out.panel.size(); ++i)
            if (out.panel[i].length() == max_len) {
                filtered.panel.push_back(out.panel[i]);
                filtered.ids.push_back(out.ids[i]);
            }
        out = std::move(filtered);
    }
    return out;
}

inline void write_panel_csv(const std::string& path, const Panel& panel,
                            const std::vector<std::string>& ids) {
    std::ofstream outf(path);
    if (!outf) throw FileError("cannot write panel file: " + path);
    int max_len = 0;
    for (const auto& s : panel) max_len = std::max(max_len, s.length());
    outf << "id";
    for (int t = 1; t <= max_len; ++t) outf << ",t" << t;
    outf << "\n";
    for (std::size_t i = 0; i < panel.size(); ++i) {
        outf << (i < ids.size() ? ids[i] : "s" + std::to_string(i + 1));
        for (int t = 0; t < max_len; ++t) {
            outf << ",";
            if (t < panel[i].length()) outf << panel[i][t];
        }
        outf << "\n";
    }
    if (!outf) throw FileError("error while writing: " + path);
}

struct LabelsFile {
    std::vector<std::string> ids;
    std::vector<int> labels;
};

/// Labels CSV: id,label per row, optional header.
inline LabelsFile read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open labels file: " + path);
    LabelsFile out;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() < 2)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected id,label");
        int v;
        if (first) {
            first = false;
            if (!detail::parse_count(cells[1], v)) continue;  // header
        }
        if (!detail::parse_count(cells[1], v))
            throw ParseError(path + ":" + std::to_string(lineno) + ": label '" + cells[1] +
                             "' is not a non-negative integer");
        out.ids.push_back(cells[0]);
        out.labels.push_back(v);
    }
    if (out.labels.empty()) throw ParseError(path + ": no labels found");
    return out;
}

inline void write_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                             const std::vector<int>& labels) {
    std::ofstream outf(path);
    if (!outf) throw FileError("cannot write labels file: " + path);
    outf << "id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        outf << (i < ids.size() ? ids[i] : "s" + std::to_string(i + 1)) << ","
             << labels[i] << "\n";
    if (!outf) throw FileError("error while writing: " + path);
}

inline void write_responsibilities_csv(const std::string& path,
                                       const std::vector<std::string>& ids,
                                       const Responsibilities& resp) {
    std::ofstream outf(path);
    if (!outf) throw FileError("cannot write responsibilities file: " + path);
    outf << "id";
    for (std::size_t g = 0; g < resp.G; ++g) outf << ",z" << (g + 1);
    outf << "\n";
    outf.precision(12);
    for (std::size_t i = 0; i < resp.n; ++i) {
        outf << (i < ids.size() ? ids[i] : "s" + std::to_string(i + 1));
        for (std::size_t g = 0; g < resp.G; ++g) outf << "," << resp.at(i, g);
        outf << "\n";
    }
    if (!outf) throw FileError("error while writing: " + path);
}

/// Per-cluster mean count trajectory: for each cluster and time index, the
/// mean over member series long enough to reach that index.
inline void write_profiles_csv(const std::string& path, const Panel& panel,
                               const std::vector<int>& labels, int G) {
    std::ofstream outf(path);
    if (!outf) throw FileError("cannot write profiles file: " + path);
    int max_len = 0;
    for (const auto& s : panel) max_len = std::max(max_len, s.length());
    outf << "cluster,t,mean_count,n_series\n";
    outf.precision(12);
    for (int g = 0; g < G; ++g)
        for (int t = 0; t < max_len; ++t) {
            double sum = 0.0;
            long count = 0;
            for (std::size_t i = 0; i < panel.size(); ++i)
                if (labels[i] == g && t < panel[i].length()) {
                    sum += panel[i][t];
                    ++count;
                }
            outf << (g + 1) << "," << (t + 1) << ",";
            if (count > 0) outf << sum / count;
            outf << "," << count << "\n";
        }
    if (!outf) throw FileError("error while writing: " + path);
}

// ---- JSON views -----------------------------------------------------------

inline nlohmann::json to_json(const ComponentParams& p, const ComponentSpec& spec) {
    nlohmann::json j{{"lag", spec.lag},
                     {"family", family_name(spec.family)},
                     {"alpha", p.alpha},
                     {"lambda", p.innovation.lambda}};
    if (spec.family == Family::NegativeBinomial) j["phi"] = p.innovation.phi;
    return j;
}

inline nlohmann::json to_json(const MixtureModel& m) {
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t g = 0; g < m.components.size(); ++g) {
        nlohmann::json c = to_json(m.components[g].params, m.components[g].spec);
        c["weight"] = m.weights[g];
        comps.push_back(std::move(c));
    }
    return nlohmann::json{{"G", m.order()}, {"components", std::move(comps)}};
}

inline nlohmann::json to_json(const SearchResult& search) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : search.rows) {
        nlohmann::json r{{"structure", row.structure.label()},
                         {"G", row.structure.order()},
                         {"count_low", row.structure.count_low},
                         {"count_high", row.structure.count_high},
                         {"lag_low", row.structure.lag_low},
                         {"lag_high", row.structure.lag_high},
                         {"ok", row.ok}};
        if (row.ok) {
            r["loglik"] = row.loglik;
            r["rho"] = row.rho;
            r["bic"] = row.bic;
            r["bic_neg2"] = -row.bic;  // the minimizing convention, for cross-checking
            r["iterations"] = row.iterations;
            r["converged"] = row.converged;
        } else {
            r["error"] = row.error;
        }
        rows.push_back(std::move(r));
    }
    const FitResult& best = search.best_fit();
    return nlohmann::json{{"candidates", std::move(rows)},
                          {"best_index", search.best_index},
                          {"best",
                           {{"structure", search.best_row().structure.label()},
                            {"model", to_json(best.model)},
                            {"loglik", best.loglik},
                            {"bic", best.bic},
                            {"iterations", best.iterations},
                            {"converged", best.converged},
                            {"mstep_warning", best.mstep_warning}}}};
}

inline nlohmann::json to_json(const CrossTab& ct) {
    return nlohmann::json{{"row_values", ct.row_values},
                          {"col_values", ct.col_values},
                          {"counts", ct.counts}};
}

inline nlohmann::json to_json(const ScenarioReport& rep) {
    nlohmann::json slots = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.slots.size(); ++k) {
        const auto& s = rep.slots[k];
        nlohmann::json j{{"component", k + 1},
                         {"true", {{"lag", s.true_lag},
                                   {"alpha", s.true_alpha},
                                   {"weight", s.true_weight},
                                   {"lambda", s.true_lambda},
                                   {"phi", s.true_phi}}},
                         {"aligned_replications", s.count}};
        if (s.count > 0) {
            j["mean_estimate"] = {{"alpha", s.alpha},
                                  {"weight", s.weight},
                                  {"lambda", s.lambda},
                                  {"phi", s.phi}};
            nlohmann::json lags = nlohmann::json::object();
            for (const auto& [lag, cnt] : s.fitted_lag_counts)
                lags[std::to_string(lag)] = cnt;
            j["fitted_lag_counts"] = std::move(lags);
        }
        slots.push_back(std::move(j));
    }
    nlohmann::json structures = nlohmann::json::object();
    for (const auto& [label, count] : rep.structure_counts) structures[label] = count;
    nlohmann::json j{{"schema", "inarmix.study.v1"},
                     {"scenario", rep.scenario},
                     {"n", rep.n},
                     {"T", rep.T},
                     {"family", family_name(rep.family)},
                     {"seed", rep.seed},
                     {"epsilon", rep.epsilon},
                     {"replications_requested", rep.replications_requested},
                     {"replications_completed", rep.replications_completed},
                     {"errors", rep.errors},
                     {"ari", rep.ari},
                     {"mean_ari", rep.mean_ari},
                     {"sd_ari", rep.sd_ari},
                     {"mean_rand", rep.mean_rand},
                     {"structure_counts", std::move(structures)},
                     {"modal_structure", rep.modal_structure},
                     {"components", std::move(slots)},
                     {"crosstab", rep.crosstab}};
    if (rep.extras.count > 0)
        j["extra_components"] = {{"count", rep.extras.count},
                                 {"alpha", rep.extras.alpha},
                                 {"weight", rep.extras.weight},
                                 {"lambda", rep.extras.lambda},
                                 {"phi", rep.extras.phi}};
    if (rep.has_baseline) {
        j["fcmdd"] = {{"ari", rep.fcmdd_ari},
                      {"mean_ari", rep.fcmdd_mean_ari},
                      {"sd_ari", rep.fcmdd_sd_ari},
                      {"selected_G", rep.fcmdd_G}};
    }
    return j;
}

/// Scenario spec from JSON, for user-defined simulate/study runs. Expected
/// shape mirrors builtin_scenarios(): name, n, T, family, components
/// [{lag, alpha, weight, lambda[, phi]}], grid {lag_low, lag_high, G_min,
/// G_max[, h_rule]}[, replications].
inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    try {
        ScenarioSpec s;
        s.name = j.at("name").get<std::string>();
        s.n = j.at("n").get<int>();
        s.T = j.at("T").get<int>();
        const std::string fam = j.at("family").get<std::string>();
        if (fam != "poisson" && fam != "nb")
            throw ParseError("scenario family must be 'poisson' or 'nb'");
        const Family family = fam == "poisson" ? Family::Poisson : Family::NegativeBinomial;
        for (const auto& c : j.at("components")) {
            TrueComponent tc;
            tc.spec = {c.at("lag").get<int>(), family};
            tc.alpha = c.at("alpha").get<double>();
            tc.weight = c.at("weight").get<double>();
            tc.lambda = c.at("lambda").get<double>();
            tc.phi = family == Family::Poisson ? 1.0 : c.at("phi").get<double>();
            s.components.push_back(tc);
        }
        const auto& g = j.at("grid");
        s.grid.lag_low = g.at("lag_low").get<int>();
        s.grid.lag_high = g.at("lag_high").get<int>();
        s.grid.G_min = g.at("G_min").get<int>();
        s.grid.G_max = g.at("G_max").get<int>();
        s.grid.family = family;
        if (g.contains("h_rule"))
            s.grid.h_rule = g.at("h_rule").get<std::string>() == "full"
                                ? ModelGrid::HRule::Full
                                : ModelGrid::HRule::ZeroOne;
        if (j.contains("replications")) s.default_replications = j.at("replications").get<int>();
        s.validate();
        return s;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid scenario spec: ") + e.what());
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream outf(path);
    if (!outf) throw FileError("cannot write file: " + path);
    outf << content;
    if (!outf) throw FileError("error while writing: " + path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace inarmix

#endif
