#ifndef INARMIX_EVAL_HPP
#define INARMIX_EVAL_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "mixture.hpp"

namespace inarmix {

/// MAP classification from responsibilities, ties toward the lower index.
inline std::vector<int> map_classify(const Responsibilities& resp) {
    return resp.map_labels();
}

/// Contingency table between two labelings; label values are categorical and
/// appear in sorted order.
struct CrossTab {
    std::vector<int> row_values;
    std::vector<int> col_values;
    std::vector<std::vector<long long>> counts;
};

inline CrossTab cross_tabulate(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size())
        throw std::invalid_argument("cross_tabulate: label vectors must have equal length");
    if (truth.empty()) throw std::invalid_argument("cross_tabulate: empty labelings");
    std::map<int, std::size_t> rows, cols;
    for (int v : truth) rows.emplace(v, 0);
    for (int v : pred) cols.emplace(v, 0);
    CrossTab ct;
    for (auto& [v, idx] : rows) {
        idx = ct.row_values.size();
        ct.row_values.push_back(v);
    }
    for (auto& [v, idx] : cols) {
        idx = ct.col_values.size();
        ct.col_values.push_back(v);
    }
    ct.counts.assign(ct.row_values.size(),
                     std::vector<long long>(ct.col_values.size(), 0));
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++ct.counts[rows[truth[i]]][cols[pred[i]]];
    return ct;
}

namespace detail {

inline double choose2(double n) { return n * (n - 1.0) / 2.0; }

struct PairCountsAgreement {
    double n = 0;
    double sum_cells = 0;  // sum over cells of C(n_ij, 2)
    double sum_rows = 0;   // sum over rows of C(a_i, 2)
    double sum_cols = 0;   // sum over cols of C(b_j, 2)
};

inline PairCountsAgreement pair_counts(const CrossTab& ct) {
    PairCountsAgreement pc;
    std::vector<long long> colsum(ct.col_values.size(), 0);
    for (std::size_t i = 0; i < ct.counts.size(); ++i) {
        long long rowsum = 0;
        for (std::size_t j = 0; j < ct.counts[i].size(); ++j) {
            const long long c = ct.counts[i][j];
            rowsum += c;
            colsum[j] += c;
            pc.sum_cells += choose2(static_cast<double>(c));
        }
        pc.n += static_cast<double>(rowsum);
        pc.sum_rows += choose2(static_cast<double>(rowsum));
    }
    for (long long c : colsum) pc.sum_cols += choose2(static_cast<double>(c));
    return pc;
}

} // namespace detail

/// Rand index: fraction of object pairs on which the two partitions agree.
/// 1 for a single object (no pairs).
inline double rand_index(const std::vector<int>& truth, const std::vector<int>& pred) {
    const detail::PairCountsAgreement pc = detail::pair_counts(cross_tabulate(truth, pred));
    const double total = detail::choose2(pc.n);
    if (total == 0.0) return 1.0;
    const double agree = total + 2.0 * pc.sum_cells - pc.sum_rows - pc.sum_cols;
    return agree / total;
}

/// Hubert-Arabie adjusted Rand index. When the adjustment denominator is
/// zero (both partitions all-singletons or all-one-cluster) the value is 1
/// for identical partitions and 0 otherwise.
inline double adjusted_rand_index(const CrossTab& ct) {
    const detail::PairCountsAgreement pc = detail::pair_counts(ct);
    const double total = detail::choose2(pc.n);
    if (total == 0.0) return 1.0;
    const double expected = pc.sum_rows * pc.sum_cols / total;
    const double maximum = 0.5 * (pc.sum_rows + pc.sum_cols);
    const double denom = maximum - expected;
    if (denom == 0.0) return pc.sum_cells == maximum ? 1.0 : 0.0;
    return (pc.sum_cells - expected) / denom;
}

inline double adjusted_rand_index(const std::vector<int>& truth, const std::vector<int>& pred) {
    return adjusted_rand_index(cross_tabulate(truth, pred));
}

} // namespace inarmix

#endif
