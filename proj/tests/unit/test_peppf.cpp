#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "../support/oracles.hpp"
#include "hhdp/errors.hpp"
#include "hhdp/partitions.hpp"
#include "hhdp/peppf.hpp"
#include "hhdp/special_fn.hpp"

using namespace hhdp;

namespace {

GroupedCounts to_counts(const std::vector<std::vector<unsigned>>& n) {
    std::vector<std::vector<std::uint32_t>> rows;
    for (const auto& r : n) rows.emplace_back(r.begin(), r.end());
    return GroupedCounts(rows);
}

// Σ over set partitions of the labelled observations, where the first
// sizes[0] observations belong to population 1 and so on.
double normalization(const std::vector<std::size_t>& sizes, const HhdpParams& p) {
    std::size_t n = 0;
    for (auto s : sizes) n += s;
    std::vector<std::size_t> pop;
    for (std::size_t j = 0; j < sizes.size(); ++j) pop.insert(pop.end(), sizes[j], j);
    double total = 0.0;
    oracle::for_each_rgs(n, [&](const std::vector<int>& a) {
        const int D = *std::max_element(a.begin(), a.end()) + 1;
        std::vector<std::vector<std::uint32_t>> rows(sizes.size(), std::vector<std::uint32_t>(D, 0));
        for (std::size_t i = 0; i < n; ++i) ++rows[pop[i]][a[i]];
        total += std::exp(hhdp_log_peppf(GroupedCounts(rows), p));
    });
    return total;
}

}  // namespace

TEST_CASE("single-sample HDP EPPF examples") {
    const HdpParams unit{1.0, 1.0};
    const std::vector<std::uint64_t> one{1}, two{2}, pair{1, 1};
    CHECK(std::abs(hdp_log_eppf_single(one, {0.3, 7.0})) < 1e-15);
    CHECK(hdp_log_eppf_single(two, unit) == doctest::Approx(std::log(0.75)).epsilon(1e-14));
    CHECK(hdp_log_eppf_single(pair, unit) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
    CHECK_THROWS_AS(hdp_log_eppf_single(std::vector<std::uint64_t>{}, unit), DomainError);
    CHECK_THROWS_AS(hdp_log_eppf_single(std::vector<std::uint64_t>{2, 0}, unit), DomainError);
    CHECK_THROWS_AS(hdp_log_eppf_single(two, {0.0, 1.0}), DomainError);

    // same-population tie probability (β+β₀+1)/((β+1)(β₀+1))
    for (double b : {0.2, 1.0, 4.0})
        for (double b0 : {0.3, 1.0, 2.5})
            CHECK(std::exp(hdp_log_eppf_single(two, {b, b0})) ==
                  doctest::Approx((b + b0 + 1) / ((b + 1) * (b0 + 1))).epsilon(1e-13));
}

TEST_CASE("multi-sample HDP pEPPF examples") {
    CHECK(hdp_log_peppf_multi(GroupedCounts({{1}, {1}}), {1.0, 1.0}) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(hdp_log_peppf_multi(GroupedCounts({{1, 0}, {0, 1}}), {1.0, 1.0}) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-14));
    const GroupedCounts c({{3, 1, 2}});
    const auto tot = c.col_totals();
    CHECK(hdp_log_peppf_multi(c, {0.7, 2.0}) ==
          doctest::Approx(hdp_log_eppf_single(tot, {0.7, 2.0})).epsilon(1e-14));
}

TEST_CASE("DP convolution equals exponential enumeration") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<unsigned> cell(0, 4);
    std::uniform_real_distribution<double> conc(0.1, 5.0);
    double worst = 0.0;
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t D = 1 + rep % 3, R = 1 + (rep / 3) % 3;
        std::vector<std::vector<unsigned>> n(R, std::vector<unsigned>(D));
        for (auto& r : n)
            for (auto& v : r) v = cell(rng);
        for (std::size_t d = 0; d < D; ++d) {
            unsigned s = 0;
            for (std::size_t r = 0; r < R; ++r) s += n[r][d];
            if (s == 0) n[rng() % R][d] = 1 + cell(rng) % 4;
        }
        const double b = conc(rng), b0 = conc(rng);
        const double ref = std::log(static_cast<double>(oracle::hdp_peppf(n, b, b0)));
        const double got = hdp_log_peppf_multi(to_counts(n), {b, b0});
        worst = std::max(worst, std::abs(got - ref));
        if (R == 1) {
            std::vector<std::uint64_t> cols(n[0].begin(), n[0].end());
            if (std::all_of(cols.begin(), cols.end(), [](auto v) { return v > 0; })) {
                CHECK(std::abs(hdp_log_eppf_single(cols, {b, b0}) - ref) < 1e-10);
            }
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("HHDP pEPPF examples") {
    CHECK(std::abs(hhdp_log_peppf(GroupedCounts(std::vector<std::vector<std::uint32_t>>{{1}}), {1.0, {1.0, 1.0}})) < 1e-15);
    CHECK(hhdp_log_peppf(GroupedCounts({{1}, {1}}), {1.0, {1.0, 1.0}}) ==
          doctest::Approx(std::log(0.625)).epsilon(1e-14));
    // cross-population tie probability, any parameters
    for (double a : {0.3, 1.0, 5.0})
        for (double b : {0.5, 2.0})
            for (double b0 : {0.4, 3.0}) {
                const double tie = 1 / (b0 + 1) + b0 / ((1 + a) * (1 + b) * (1 + b0));
                CHECK(std::exp(hhdp_log_peppf(GroupedCounts({{1}, {1}}), {a, {b, b0}})) ==
                      doctest::Approx(tie).epsilon(1e-13));
            }
}

TEST_CASE("HHDP pEPPF normalization over labelled partitions") {
    const std::vector<double> grid{0.5, 1.0, 3.0};
    for (double a : grid)
        for (double b : grid)
            for (double b0 : grid) {
                const HhdpParams p{a, {b, b0}};
                for (std::size_t n = 1; n <= 6; ++n) {
                    CHECK(std::abs(normalization({n}, p) - 1.0) < 1e-9);
                    for (std::size_t i1 = 1; i1 < n; ++i1) {
                        CHECK(std::abs(normalization({i1, n - i1}, p) - 1.0) < 1e-9);
                    }
                }
            }
    // three populations, a few shapes
    CHECK(std::abs(normalization({2, 1, 2}, {0.7, {1.3, 0.6}}) - 1.0) < 1e-9);
    CHECK(std::abs(normalization({1, 1, 1, 1}, {2.0, {0.5, 3.0}}) - 1.0) < 1e-9);
}

TEST_CASE("HHDP pEPPF symmetry") {
    const HhdpParams p{1.4, {0.8, 2.2}};
    const GroupedCounts c({{3, 0, 1}, {1, 2, 0}, {0, 1, 4}});
    const double base = hhdp_log_peppf(c, p);
    CHECK(hhdp_log_peppf(GroupedCounts({{1, 2, 0}, {0, 1, 4}, {3, 0, 1}}), p) ==
          doctest::Approx(base).epsilon(1e-13));
    CHECK(hhdp_log_peppf(GroupedCounts({{1, 3, 0}, {0, 1, 2}, {4, 0, 1}}), p) ==
          doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("posterior degeneracy probability") {
    const HdpParams unit{1.0, 1.0};
    CHECK(posterior_degeneracy_prob(GroupedCounts({{1}, {1}}), {1.0, unit}) ==
          doctest::Approx(0.6).epsilon(1e-13));
    CHECK(posterior_degeneracy_prob(GroupedCounts({{1, 0}, {0, 1}}), {1.0, unit}) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(posterior_degeneracy_prob(GroupedCounts({{1}, {1}}), {1e-12, unit}) > 1.0 - 1e-11);
    CHECK_THROWS_AS(posterior_degeneracy_prob(GroupedCounts({{1}, {1}, {1}}), {1.0, unit}),
                    ShapeError);

    const GroupedCounts shared({{1}, {1}});
    for (double a : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
        const double v = posterior_degeneracy_prob(shared, {a, unit});
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    const std::vector<GroupedCounts> cases{GroupedCounts({{1}, {1}}), GroupedCounts({{4, 1}, {0, 3}}),
                                           GroupedCounts({{2, 2, 0}, {1, 0, 5}})};
    for (const auto& c : cases) {
        double prev = 2.0;
        for (double a = 0.05; a < 50.0; a *= 1.7) {
            const double v = posterior_degeneracy_prob(c, {a, {0.9, 1.6}});
            CHECK(v < prev);
            prev = v;
        }
    }
    // the definition, evaluated from the two HDP pEPPFs
    const GroupedCounts c({{2, 1, 0}, {1, 0, 3}});
    const HhdpParams p{0.7, {1.2, 0.5}};
    const double l1 = hdp_log_eppf_single(c.col_totals(), p.hdp);
    const double l2 = hdp_log_peppf_multi(c, p.hdp);
    CHECK(posterior_degeneracy_prob(c, p) ==
          doctest::Approx(1.0 / (1.0 + p.alpha * std::exp(l2 - l1))).epsilon(1e-13));
}

TEST_CASE("sample_table_counts follows the exact table-count law") {
    const std::vector<std::vector<unsigned>> n{{2, 1}, {1, 3}};
    const HdpParams p{1.3, 0.6};
    // exact law over ℓ by enumeration
    std::map<std::vector<unsigned>, long double> law;
    long double z = 0.0L;
    for (unsigned a = 1; a <= 2; ++a)
        for (unsigned b = 1; b <= 1; ++b)
            for (unsigned c = 1; c <= 1; ++c)
                for (unsigned d = 1; d <= 3; ++d) {
                    const unsigned d0 = a + c, d1 = b + d, tot = d0 + d1;
                    long double w = std::pow(1.3L, tot) / oracle::rising(0.6L, tot) *
                                    oracle::factorial(d0 - 1) * oracle::factorial(d1 - 1) *
                                    oracle::stirling(2, a) * oracle::stirling(1, b) *
                                    oracle::stirling(1, c) * oracle::stirling(3, d);
                    law[{a, b, c, d}] = w;
                    z += w;
                }
    Rng rng(99);
    const int N = 200000;
    std::map<std::vector<unsigned>, int> freq;
    for (int i = 0; i < N; ++i) {
        const auto ell = sample_table_counts(to_counts(n), p, rng);
        freq[{ell[0][0], ell[0][1], ell[1][0], ell[1][1]}]++;
    }
    for (const auto& [k, w] : law) {
        const double pr = static_cast<double>(w / z);
        const double se = std::sqrt(pr * (1 - pr) / N);
        CHECK(std::abs(freq[k] / double(N) - pr) < 4.5 * se);
    }
    std::size_t seen = 0;
    for (const auto& [k, f] : freq) seen += law.count(k);
    CHECK(seen == freq.size());

    const auto zero = sample_table_counts(GroupedCounts({{3, 0}, {0, 2}}), p, rng);
    CHECK(zero[0][1] == 0);
    CHECK(zero[1][0] == 0);
}

TEST_CASE("sample_seating") {
    Rng rng(4);
    const int N = 100000;
    int even = 0;
    for (int i = 0; i < N; ++i) {
        const auto lab = sample_seating(4, 2, rng);
        std::vector<int> sz(2, 0);
        for (auto t : lab) {
            REQUIRE(t < 2);
            ++sz[t];
        }
        REQUIRE(sz[0] > 0);
        REQUIRE(sz[1] > 0);
        if (sz[0] == 2) ++even;
    }
    // |s(4,2)| = 11 seatings: 8 with sizes {1,3} and 3 with {2,2}
    const double pr = 3.0 / 11.0;
    CHECK(std::abs(even / double(N) - pr) < 4.5 * std::sqrt(pr * (1 - pr) / N));
    CHECK(sample_seating(5, 5, rng).size() == 5);
    CHECK_THROWS_AS(sample_seating(3, 4, rng), DomainError);
    CHECK_THROWS_AS(sample_seating(3, 0, rng), DomainError);
}
