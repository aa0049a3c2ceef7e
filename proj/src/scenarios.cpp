#include "hhdp/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "hhdp/errors.hpp"

namespace hhdp {

ScenarioId parse_scenario(const std::string& s) {
    if (s == "S1" || s == "s1" || s == "1") return ScenarioId::S1;
    if (s == "S2" || s == "s2" || s == "2") return ScenarioId::S2;
    if (s == "S3" || s == "s3" || s == "3") return ScenarioId::S3;
    if (s == "S4" || s == "s4" || s == "4") return ScenarioId::S4;
    throw UsageError("unknown scenario '" + s + "' (expected S1, S2, S3 or S4)");
}

std::string to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::S1: return "S1";
        case ScenarioId::S2: return "S2";
        case ScenarioId::S3: return "S3";
        case ScenarioId::S4: return "S4";
    }
    return "?";
}

ScaleConvention parse_scale_convention(const std::string& s) {
    if (s == "variance") return ScaleConvention::Variance;
    if (s == "sd") return ScaleConvention::StdDev;
    throw UsageError("unknown scale convention '" + s + "' (expected variance or sd)");
}

std::string to_string(ScaleConvention c) {
    return c == ScaleConvention::Variance ? "variance" : "sd";
}

double ScenarioSpec::component_sd(std::size_t c) const {
    const double s = components[c].scale;
    return convention == ScaleConvention::Variance ? std::sqrt(s) : s;
}

void ScenarioSpec::validate() const {
    if (sizes.empty() || sizes.size() != weights.size()) {
        throw UsageError("scenario needs one weight vector per population");
    }
    for (const auto& c : components) {
        if (!std::isfinite(c.mean) || !(c.scale > 0.0) || !std::isfinite(c.scale)) {
            throw UsageError("scenario components need finite means and positive scales");
        }
    }
    for (const auto& w : weights) {
        if (w.size() != components.size()) throw UsageError("weight vector length mismatch");
        double total = 0.0;
        for (double v : w) {
            if (!(v >= 0.0)) throw UsageError("negative mixture weight");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-12) throw UsageError("mixture weights must sum to 1");
    }
}

ScenarioSpec make_scenario(ScenarioId id, std::uint64_t seed, ScaleConvention convention) {
    ScenarioSpec s;
    s.id = id;
    s.seed = seed;
    s.convention = convention;
    switch (id) {
        case ScenarioId::S1:
            // the same N(0, 1) twice: two labelled halves of one density
            s.components = {{0.0, 1.0}, {0.0, 1.0}};
            s.weights = {{0.5, 0.5}, {0.5, 0.5}};
            break;
        case ScenarioId::S2:
            s.components = {{5.0, 0.6}, {10.0, 0.6}, {0.0, 0.6}};
            s.weights = {{0.9, 0.1, 0.0}, {0.1, 0.0, 0.9}};
            break;
        case ScenarioId::S3:
            s.components = {{5.0, 1.0}, {0.0, 1.0}};
            s.weights = {{0.8, 0.2}, {0.2, 0.8}};
            break;
        case ScenarioId::S4:
            s.components = {{0.0, 1.0}, {5.0, 1.0}, {-5.0, 1.0}};
            s.weights = {{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}};
            break;
    }
    s.sizes.assign(s.weights.size(), 100);
    return s;
}

ScenarioData generate(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    ScenarioData out;
    out.data.values.resize(spec.sizes.size());
    out.truth.resize(spec.sizes.size());
    for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
        const auto& w = spec.weights[j];
        for (std::size_t i = 0; i < spec.sizes[j]; ++i) {
            double u = uniform_open(rng);
            std::size_t c = 0;
            for (; c + 1 < w.size(); ++c) {
                if (u < w[c]) break;
                u -= w[c];
            }
            while (w[c] == 0.0 && c > 0) --c;
            const double x = spec.components[c].mean + spec.component_sd(c) * standard_normal(rng);
            out.data.values[j].push_back(x);
            out.truth[j].push_back(c);
        }
    }
    return out;
}

ScenarioData generate(const ScenarioSpec& spec) {
    Rng rng(derive_stream_seed(spec.seed, 0));
    return generate(spec, rng);
}

double true_density(const ScenarioSpec& spec, std::size_t population, double x) {
    double f = 0.0;
    const auto& w = spec.weights.at(population);
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (w[c] == 0.0) continue;
        const double sd = spec.component_sd(c);
        const double z = (x - spec.components[c].mean) / sd;
        f += w[c] * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    }
    return f;
}

}  // namespace hhdp
