#include <inarmix/inarmix.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace inarmix;

namespace {

// Definition-level pair counting, written independently of the library's
// contingency-table formula.
struct PairTally {
    long same_same = 0, same_diff = 0, diff_same = 0, diff_diff = 0;
    long total() const { return same_same + same_diff + diff_same + diff_diff; }
};

PairTally tally_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    PairTally t;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j], sb = b[i] == b[j];
            if (sa && sb) ++t.same_same;
            else if (sa) ++t.same_diff;
            else if (sb) ++t.diff_same;
            else ++t.diff_diff;
        }
    return t;
}

double brute_rand(const std::vector<int>& a, const std::vector<int>& b) {
    const PairTally t = tally_pairs(a, b);
    if (t.total() == 0) return 1.0;
    return (double)(t.same_same + t.diff_diff) / (double)t.total();
}

double brute_ari(const std::vector<int>& a, const std::vector<int>& b) {
    const PairTally t = tally_pairs(a, b);
    const double n = (double)t.total();
    if (n == 0) return 1.0;
    const double sum_cells = (double)t.same_same;
    const double sum_a = (double)(t.same_same + t.same_diff);
    const double sum_b = (double)(t.same_same + t.diff_same);
    const double expected = sum_a * sum_b / n;
    const double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) return sum_cells == maximum ? 1.0 : 0.0;
    return (sum_cells - expected) / (maximum - expected);
}

// All partitions of {0..n-1} as restricted growth strings.
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

}  // namespace

TEST_CASE("map classification") {
    Responsibilities r(3, 2);
    r.at(0, 0) = 0.9, r.at(0, 1) = 0.1;
    r.at(1, 0) = 0.5, r.at(1, 1) = 0.5;  // tie goes to the lower index
    r.at(2, 0) = 0.2, r.at(2, 1) = 0.8;
    const std::vector<int> labels = map_classify(r);
    CHECK(labels == std::vector<int>{0, 0, 1});
}

TEST_CASE("cross tabulation") {
    const CrossTab ct = cross_tabulate({1, 1, 2, 2, 2}, {5, 7, 5, 7, 7});
    REQUIRE(ct.row_values == std::vector<int>{1, 2});
    REQUIRE(ct.col_values == std::vector<int>{5, 7});
    CHECK(ct.counts[0][0] == 1);
    CHECK(ct.counts[0][1] == 1);
    CHECK(ct.counts[1][0] == 1);
    CHECK(ct.counts[1][1] == 2);
    CHECK_THROWS_AS(cross_tabulate({1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("rand index") {
    CHECK(rand_index({1, 1, 2, 2}, {1, 1, 2, 2}) == 1.0);
    CHECK(rand_index({1, 1, 2, 2}, {1, 2, 1, 2}) == Catch::Approx(2.0 / 6.0));
    CHECK(rand_index({0, 1, 2}, {4, 4, 4}) == 0.0);
}

TEST_CASE("adjusted rand index") {
    SECTION("identical partitions score one, relabeled too") {
        CHECK(adjusted_rand_index({1, 1, 2, 2, 3}, {1, 1, 2, 2, 3}) == Catch::Approx(1.0));
        CHECK(adjusted_rand_index({1, 1, 2, 2, 3}, {7, 7, 0, 0, 2}) == Catch::Approx(1.0));
    }
    SECTION("crossed two-by-two partitions score -1/2 by exhaustive pair counting") {
        const std::vector<int> a{1, 1, 2, 2}, b{1, 2, 1, 2};
        CHECK(brute_ari(a, b) == Catch::Approx(-0.5));
        CHECK(adjusted_rand_index(a, b) == Catch::Approx(-0.5).epsilon(1e-12));
    }
    SECTION("degenerate one-cluster partitions") {
        CHECK(adjusted_rand_index({3, 3, 3}, {1, 1, 1}) == 1.0);       // identical shape
        CHECK(adjusted_rand_index({1, 2, 3}, {0, 0, 0}) == 0.0);       // opposite extremes
        CHECK(adjusted_rand_index(std::vector<int>{4}, std::vector<int>{9}) == 1.0);
    }
    SECTION("crosstab and label overloads agree") {
        const std::vector<int> a{0, 0, 1, 1, 2, 2, 0}, b{1, 1, 1, 0, 2, 2, 0};
        CHECK(adjusted_rand_index(cross_tabulate(a, b)) ==
              Catch::Approx(adjusted_rand_index(a, b)).epsilon(1e-14));
    }
    SECTION("agrees with definition-level pair counting on every partition pair, n <= 7") {
        long mismatches = 0, compared = 0;
        for (int n = 1; n <= 7; ++n) {
            const auto parts = all_partitions(n);
            for (const auto& a : parts)
                for (const auto& b : parts) {
                    ++compared;
                    const double lib = adjusted_rand_index(a, b);
                    const double ref = brute_ari(a, b);
                    if (std::fabs(lib - ref) > 1e-12) ++mismatches;
                    if (std::fabs(rand_index(a, b) - brute_rand(a, b)) > 1e-12)
                        ++mismatches;
                }
        }
        INFO("compared " << compared << " partition pairs");
        CHECK(compared > 700000);
        CHECK(mismatches == 0);
    }
    SECTION("random labelings average to zero") {
        Rng rng = make_rng(404);
        const int draws = 10000, n = 200;
        double sum = 0.0;
        std::vector<int> a((std::size_t)n), b((std::size_t)n);
        for (int d = 0; d < draws; ++d) {
            for (auto& v : a) v = (int)(rng() % 2);
            for (auto& v : b) v = (int)(rng() % 2);
            sum += adjusted_rand_index(a, b);
        }
        CHECK(std::fabs(sum / draws) <= 0.01);
    }
}
