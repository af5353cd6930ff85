#ifndef INARMIX_SERIES_HPP
#define INARMIX_SERIES_HPP

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace inarmix {

/// A single observed count series. Values are validated to be non-negative
/// on construction; series of any positive length are accepted so panels may
/// be ragged.
struct CountSeries {
    std::vector<int> values;

    CountSeries() = default;

    explicit CountSeries(std::vector<int> v) : values(std::move(v)) {
        if (values.empty())
            throw std::invalid_argument("CountSeries: series must be non-empty");
        for (std::size_t t = 0; t < values.size(); ++t)
            if (values[t] < 0)
                throw std::invalid_argument("CountSeries: negative count at position " +
                                            std::to_string(t));
    }

    int length() const { return static_cast<int>(values.size()); }
    int operator[](int t) const { return values[static_cast<std::size_t>(t)]; }

    long long sum() const {
        return std::accumulate(values.begin(), values.end(), 0LL);
    }

    double mean() const { return static_cast<double>(sum()) / length(); }

    /// Unbiased sample variance; 0 for series of length 1.
    double variance() const {
        const int T = length();
        if (T < 2) return 0.0;
        const double m = mean();
        double ss = 0.0;
        for (int v : values) {
            const double d = v - m;
            ss += d * d;
        }
        return ss / (T - 1);
    }

    bool constant() const {
        for (int v : values)
            if (v != values[0]) return false;
        return true;
    }

    int max_value() const {
        int m = 0;
        for (int v : values)
            if (v > m) m = v;
        return m;
    }
};

using Panel = std::vector<CountSeries>;

inline long long total_observations(const Panel& panel) {
    long long n = 0;
    for (const auto& s : panel) n += s.length();
    return n;
}

inline int panel_max_value(const Panel& panel) {
    int m = 0;
    for (const auto& s : panel) m = std::max(m, s.max_value());
    return m;
}

/// Mean count over every observation in the panel.
inline double panel_grand_mean(const Panel& panel) {
    long long total = 0, n = 0;
    for (const auto& s : panel) {
        total += s.sum();
        n += s.length();
    }
    if (n == 0) throw std::invalid_argument("panel_grand_mean: empty panel");
    return static_cast<double>(total) / static_cast<double>(n);
}

/// Sample autocorrelation at the given lag, computed around the series mean.
/// Returns 0 for constant series (zero denominator) and for lags >= length.
inline double autocorrelation(const CountSeries& s, int lag) {
    if (lag < 1) throw std::domain_error("autocorrelation: lag must be >= 1");
    const int T = s.length();
    if (lag >= T) return 0.0;
    const double m = s.mean();
    double denom = 0.0;
    for (int v : s.values) {
        const double d = v - m;
        denom += d * d;
    }
    if (denom <= 0.0) return 0.0;
    double num = 0.0;
    for (int t = lag; t < T; ++t)
        num += (s.values[static_cast<std::size_t>(t)] - m) *
               (s.values[static_cast<std::size_t>(t - lag)] - m);
    return num / denom;
}

} // namespace inarmix

#endif
