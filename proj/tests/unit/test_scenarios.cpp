#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "hhdp/errors.hpp"
#include "hhdp/io.hpp"
#include "hhdp/scenarios.hpp"

using namespace hhdp;

TEST_CASE("scenario parsing") {
    CHECK(parse_scenario("S3") == ScenarioId::S3);
    CHECK(to_string(ScenarioId::S4) == "S4");
    CHECK_THROWS_AS(parse_scenario("S5"), UsageError);
    CHECK(parse_scale_convention("sd") == ScaleConvention::StdDev);
    CHECK(parse_scale_convention("variance") == ScaleConvention::Variance);
    CHECK_THROWS_AS(parse_scale_convention("precision"), UsageError);
}

TEST_CASE("scenario designs") {
    for (ScenarioId id : {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4}) {
        const ScenarioSpec s = make_scenario(id);
        s.validate();
        CHECK(s.sizes.size() == (id == ScenarioId::S4 ? 4u : 2u));
        for (const auto& w : s.weights) {
            CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
    const ScenarioSpec s2 = make_scenario(ScenarioId::S2);
    CHECK(s2.component_sd(0) == doctest::Approx(std::sqrt(0.6)));
    const ScenarioSpec s2sd = make_scenario(ScenarioId::S2, 1, ScaleConvention::StdDev);
    CHECK(s2sd.component_sd(0) == doctest::Approx(0.6));

    ScenarioSpec bad = make_scenario(ScenarioId::S3);
    bad.weights[0] = {0.7, 0.2};
    CHECK_THROWS(bad.validate());
    bad = make_scenario(ScenarioId::S3);
    bad.components[0].scale = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("S1 uses one density for both populations") {
    const ScenarioData d = generate(make_scenario(ScenarioId::S1));
    CHECK(d.data.total() == 200);
    CHECK(d.data.sizes() == std::vector<std::size_t>{100, 100});
    std::set<std::size_t> c0(d.truth[0].begin(), d.truth[0].end()), c1(d.truth[1].begin(), d.truth[1].end());
    CHECK(c0 == c1);
}

TEST_CASE("S3 population means") {
    const ScenarioSpec spec = make_scenario(ScenarioId::S3);
    const ScenarioData d = generate(spec);
    // mixture mean 0.8·5 + 0.2·0 = 4; sd² = 1 + 0.8·0.2·25 = 5
    const double sd = std::sqrt(1.0 + 0.8 * 0.2 * 25.0);
    const double m0 = std::accumulate(d.data.values[0].begin(), d.data.values[0].end(), 0.0) / 100;
    const double m1 = std::accumulate(d.data.values[1].begin(), d.data.values[1].end(), 0.0) / 100;
    CHECK(std::abs(m0 - 4.0) < 3 * sd / 10);
    CHECK(std::abs(m1 - 1.0) < 3 * sd / 10);
}

TEST_CASE("component frequencies at n = 10000") {
    for (ScenarioId id : {ScenarioId::S2, ScenarioId::S3, ScenarioId::S4}) {
        ScenarioSpec spec = make_scenario(id, 5);
        for (auto& n : spec.sizes) n = 10000;
        const ScenarioData d = generate(spec);
        for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
            std::vector<double> freq(spec.components.size(), 0.0);
            for (auto c : d.truth[j]) freq[c] += 1.0 / 10000;
            for (std::size_t c = 0; c < freq.size(); ++c) {
                const double w = spec.weights[j][c];
                CHECK(std::abs(freq[c] - w) <= 3 * std::sqrt(w * (1 - w) / 10000) + 1e-12);
            }
        }
    }
}

TEST_CASE("generated values follow their components") {
    ScenarioSpec spec = make_scenario(ScenarioId::S2);
    spec.sizes = {20000, 20000};
    const ScenarioData d = generate(spec);
    std::vector<double> sum(3, 0), sum2(3, 0), cnt(3, 0);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < d.truth[j].size(); ++i) {
            const auto c = d.truth[j][i];
            const double x = d.data.values[j][i];
            sum[c] += x;
            sum2[c] += x * x;
            cnt[c] += 1;
        }
    for (std::size_t c = 0; c < 3; ++c) {
        if (cnt[c] == 0) continue;
        const double m = sum[c] / cnt[c], v = sum2[c] / cnt[c] - m * m;
        CHECK(std::abs(m - spec.components[c].mean) < 4 * std::sqrt(0.6 / cnt[c]));
        CHECK(std::abs(v - 0.6) < 4 * 0.6 * std::sqrt(2.0 / cnt[c]));
    }
}

TEST_CASE("generation is deterministic") {
    auto render = [](std::uint64_t seed) {
        std::ostringstream os;
        const ScenarioData d = generate(make_scenario(ScenarioId::S4, seed));
        write_grouped_csv(os, d.data, d.truth);
        return os.str();
    };
    CHECK(render(3) == render(3));
    CHECK(render(3) != render(4));
}

TEST_CASE("true density integrates to one") {
    const ScenarioSpec spec = make_scenario(ScenarioId::S4);
    for (std::size_t j = 0; j < 4; ++j) {
        double total = 0.0;
        for (double x = -20.0; x <= 20.0; x += 0.001) total += true_density(spec, j, x) * 0.001;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}
