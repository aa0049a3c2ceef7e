#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hhdp/errors.hpp"
#include "hhdp/inference.hpp"

using namespace hhdp;

namespace {

PosteriorDraws make_draws(const std::vector<std::size_t>& sizes) {
    PosteriorDraws pd;
    pd.meta.sizes = sizes;
    return pd;
}

Draw make_draw(std::vector<std::size_t> z, std::vector<std::vector<std::size_t>> zeta) {
    Draw d;
    d.z = std::move(z);
    d.zeta = std::move(zeta);
    std::size_t A = 0;
    for (const auto& zj : d.zeta)
        for (auto v : zj) A = std::max(A, v + 1);
    for (std::size_t a = 0; a < A; ++a) d.atoms.push_back(Atom{static_cast<double>(a), 1.0});
    d.weights.assign(d.zeta.size(), std::vector<double>(A, 1.0 / static_cast<double>(A)));
    return d;
}

SetPartition random_partition(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> lab(0, static_cast<int>(n) - 1);
    std::vector<int> v(n);
    const int k = 1 + lab(rng);
    for (auto& x : v) x = lab(rng) % k;
    return SetPartition::from_labels(v);
}

// VI from the definition H(p) + H(q) − 2 I(p, q), written with joint block probabilities.
double vi_oracle(const SetPartition& p, const SetPartition& q) {
    const auto a = p.labels(), b = q.labels();
    const double n = static_cast<double>(a.size());
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1 / n;
        pb[b[i]] += 1 / n;
        pab[{a[i], b[i]}] += 1 / n;
    }
    double h_a = 0, h_b = 0, mi = 0;
    for (auto [k, v] : pa) h_a -= v * std::log(v);
    for (auto [k, v] : pb) h_b -= v * std::log(v);
    for (auto [k, v] : pab) mi += v * std::log(v / (pa[k.first] * pb[k.second]));
    return h_a + h_b - 2 * mi;
}

}  // namespace

TEST_CASE("variation of information") {
    const SetPartition p({{0, 1}, {2}});
    const SetPartition q({{0}, {1}, {2}});
    const double expected = std::log(3.0) - (2.0 / 3.0) * std::log(1.5) - (1.0 / 3.0) * std::log(3.0);
    CHECK(vi_distance(p, q) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(vi_distance(p, q) == doctest::Approx(0.4621).epsilon(1e-4));
    CHECK_THROWS_AS(vi_distance(p, SetPartition(std::vector<std::vector<std::size_t>>{{0, 1}})), ShapeError);

    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto a = random_partition(8, rng), b = random_partition(8, rng), c = random_partition(8, rng);
        CHECK(vi_distance(a, a) == 0.0);
        CHECK(vi_distance(a, b) == vi_distance(b, a));
        CHECK(vi_distance(a, c) <= vi_distance(a, b) + vi_distance(b, c) + 1e-12);
        if (!(a == b)) CHECK(vi_distance(a, b) > 0.0);
        CHECK(vi_distance(a, b) == doctest::Approx(vi_oracle(a, b)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("VI point estimate") {
    const SetPartition p({{0, 1}, {2, 3}});
    const SetPartition q({{0}, {1, 2, 3}});
    std::vector<SetPartition> same(5, p);
    CHECK(vi_point_estimate(same).partition == p);
    CHECK(vi_point_estimate(same).expected_loss == 0.0);
    CHECK(vi_point_estimate(same).candidates == 1);

    std::vector<SetPartition> mix(9, p);
    mix.push_back(q);
    const ViEstimate e = vi_point_estimate(mix);
    CHECK(e.partition == p);
    CHECK(e.expected_loss == doctest::Approx(vi_distance(p, q) / 10).epsilon(1e-13));
    CHECK(e.candidates == 2);

    // an exact tie goes to the partition with fewer blocks
    const SetPartition one({{0, 1, 2, 3}});
    const SetPartition all({{0}, {1}, {2}, {3}});
    std::vector<SetPartition> tie{all, one};
    CHECK(vi_point_estimate(tie).partition == one);
    CHECK_THROWS_AS(vi_point_estimate(std::vector<SetPartition>{}), UsageError);
}

TEST_CASE("co-clustering") {
    auto pd = make_draws({2, 1});
    pd.draws.push_back(make_draw({0, 0}, {{0, 0}, {1}}));
    SquareMatrix single = coclustering_matrix(pd, Level::Observations);
    for (double v : single.values) CHECK((v == 0.0 || v == 1.0));
    CHECK(single(0, 1) == 1.0);
    CHECK(single(0, 2) == 0.0);

    pd.draws.push_back(make_draw({0, 1}, {{0, 1}, {1}}));
    const SquareMatrix m = coclustering_matrix(pd, Level::Observations);
    CHECK(m(0, 1) == 0.5);
    CHECK(m(1, 2) == 0.5);
    CHECK(m(0, 2) == 0.0);
    CHECK(m(2, 2) == 1.0);
    const SquareMatrix pz = coclustering_matrix(pd, Level::Populations);
    CHECK(pz(0, 1) == 0.5);
    CHECK(homogeneity_probability(pd) == 0.5);

    // relabelling ζ within a draw changes nothing
    auto relabelled = pd;
    for (auto& d : relabelled.draws) {
        for (auto& zj : d.zeta)
            for (auto& v : zj) v = 7 - v;
        d.atoms.resize(8);
        for (auto& w : d.weights) w.resize(8, 0.0);
    }
    CHECK(coclustering_matrix(relabelled, Level::Observations).values == m.values);

    auto homog = make_draws({1, 1});
    homog.draws.push_back(make_draw({2, 2}, {{0}, {0}}));
    homog.draws.push_back(make_draw({1, 1}, {{0}, {1}}));
    CHECK(homogeneity_probability(homog) == 1.0);
    CHECK(homogeneity_probability(GroupedCounts({{1}, {1}}), {1.0, {1.0, 1.0}}) ==
          doctest::Approx(0.6).epsilon(1e-13));
    CHECK_THROWS_AS(homogeneity_probability(GroupedCounts({{1}, {1}, {1}}), {1.0, {1.0, 1.0}}),
                    ShapeError);
    CHECK_THROWS_AS(homogeneity_probability(make_draws({1, 1})), UsageError);
}

TEST_CASE("density estimates") {
    std::vector<double> grid;
    for (int i = -40; i <= 40; ++i) grid.push_back(i * 0.1);

    auto one = make_draws({1});
    Draw d = make_draw({0}, {{0}});
    d.atoms = {Atom{0.0, 1.0}, Atom{3.0, 0.5}};
    d.weights = {{1.0, 0.0}};
    one.draws.push_back(d);
    const DensitySummary s = density_estimate(one, 0, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double ref = std::exp(-0.5 * grid[g] * grid[g]) / std::sqrt(2 * M_PI);
        CHECK(std::abs(s.mean[g] - ref) < 1e-12);
        CHECK(s.lower[g] == s.mean[g]);
        CHECK(s.upper[g] == s.mean[g]);
    }

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    auto many = make_draws({2, 1});
    for (int i = 0; i < 30; ++i) {
        Draw e = make_draw({0, 0}, {{0, 1}, {1}});
        e.atoms = {Atom{u(rng) - 1, u(rng)}, Atom{u(rng) + 1, u(rng)}};
        const double w = u(rng) / 2.0;
        e.weights = {{w, 1 - w}, {1 - w, w}};
        many.draws.push_back(e);
    }
    const DensitySummary base = density_estimate(many, 1, grid);
    auto shuffled = many;
    std::shuffle(shuffled.draws.begin(), shuffled.draws.end(), rng);
    const DensitySummary perm = density_estimate(shuffled, 1, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CHECK(perm.mean[g] == doctest::Approx(base.mean[g]).epsilon(1e-13));
        CHECK(base.lower[g] <= base.mean[g]);
        CHECK(base.mean[g] <= base.upper[g]);
    }
    const auto all = density_estimates(many, grid);
    REQUIRE(all.size() == 2);
    CHECK(all[1].mean == base.mean);
    CHECK_THROWS_AS(density_estimate(many, 2, grid), ShapeError);
    std::vector<double> unsorted{1.0, 0.0};
    CHECK_THROWS_AS(density_estimate(many, 0, unsorted), UsageError);

    CHECK(quantile_type7({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile_type7({5, 1, 3}, 0.25) == 2.0);
    CHECK(quantile_type7({7}, 0.975) == 7.0);
}

TEST_CASE("number of components") {
    auto pd = make_draws({2, 2});
    pd.draws.push_back(make_draw({0, 0}, {{0, 0}, {0, 0}}));
    pd.draws.push_back(make_draw({0, 1}, {{0, 3}, {3, 5}}));
    pd.draws.push_back(make_draw({0, 1}, {{1, 1}, {4, 4}}));
    pd.draws.push_back(make_draw({0, 1}, {{2, 2}, {2, 2}}));
    const auto post = n_components_posterior(pd);
    CHECK(post.at(1) == 0.5);
    CHECK(post.at(2) == 0.25);
    CHECK(post.at(3) == 0.25);
}

TEST_CASE("shared clusters summary") {
    SUBCASE("hand-counted fixture") {
        auto pd = make_draws({2, 2, 2});
        pd.draws.push_back(make_draw({0, 0, 1}, {{0, 1}, {1, 2}, {2, 3}}));
        pd.draws.push_back(make_draw({0, 0, 1}, {{0, 0}, {0, 0}, {0, 0}}));
        const auto s = shared_clusters_summary(pd, SetPartition({{0, 1}, {2}}));
        CHECK(s.only_first == std::map<std::size_t, double>{{0, 0.5}, {2, 0.5}});
        CHECK(s.only_second == std::map<std::size_t, double>{{0, 0.5}, {1, 0.5}});
        CHECK(s.shared == std::map<std::size_t, double>{{1, 1.0}});
        const auto est = shared_clusters_summary(pd);
        CHECK(est.population_estimate == SetPartition({{0, 1}, {2}}));
    }
    SUBCASE("a single population block") {
        auto pd = make_draws({2, 1});
        pd.draws.push_back(make_draw({0, 0}, {{0, 1}, {1}}));
        const auto s = shared_clusters_summary(pd);
        CHECK(s.population_estimate.num_blocks() == 1);
        CHECK(s.only_first == std::map<std::size_t, double>{{2, 1.0}});
        CHECK(s.only_second == std::map<std::size_t, double>{{0, 1.0}});
        CHECK(s.shared == std::map<std::size_t, double>{{0, 1.0}});
    }
    SUBCASE("every cluster in both blocks") {
        auto pd = make_draws({2, 2});
        pd.draws.push_back(make_draw({0, 1}, {{0, 1}, {1, 0}}));
        const auto s = shared_clusters_summary(pd, SetPartition({{0}, {1}}));
        CHECK(s.only_first == std::map<std::size_t, double>{{0, 1.0}});
        CHECK(s.only_second == std::map<std::size_t, double>{{0, 1.0}});
        CHECK(s.shared == std::map<std::size_t, double>{{2, 1.0}});
    }
}

TEST_CASE("cluster frequency table") {
    const SetPartition p = SetPartition::from_labels(std::vector<int>{0, 1, 1, 1, 0, 2});
    const std::vector<std::size_t> sizes{3, 3};
    const auto t = cluster_frequency_table(p, sizes);
    REQUIRE(t.size() == 2);
    CHECK(t[0] == std::vector<std::size_t>{2, 1, 0});
    CHECK(t[1] == std::vector<std::size_t>{1, 1, 1});
    CHECK_THROWS_AS(cluster_frequency_table(p, std::vector<std::size_t>{3, 2}), ShapeError);
}
