#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hhdp/nig.hpp"
#include "hhdp/random.hpp"

namespace hhdp {

enum class ScenarioId { S1, S2, S3, S4 };

ScenarioId parse_scenario(const std::string& s);
std::string to_string(ScenarioId id);

/// How the second argument of N(mean, ·) in a scenario table is read.
enum class ScaleConvention { Variance, StdDev };

ScaleConvention parse_scale_convention(const std::string& s);
std::string to_string(ScaleConvention c);

struct GaussianComponent {
    double mean = 0.0;
    double scale = 1.0;  // variance or standard deviation, see ScaleConvention
};

struct ScenarioSpec {
    ScenarioId id = ScenarioId::S1;
    std::vector<std::size_t> sizes;
    std::uint64_t seed = 1;
    ScaleConvention convention = ScaleConvention::Variance;
    std::vector<GaussianComponent> components;       // global component list
    std::vector<std::vector<double>> weights;        // per population, over components

    double component_sd(std::size_t c) const;
    void validate() const;
};

/// Built-in designs: two populations of 100 (S1–S3) or four of 100 (S4).
ScenarioSpec make_scenario(ScenarioId id, std::uint64_t seed = 1,
                           ScaleConvention convention = ScaleConvention::Variance);

struct ScenarioData {
    GroupedData data;
    std::vector<std::vector<std::size_t>> truth;  // 0-based component of each observation
};

/// Deterministic given spec.seed.
ScenarioData generate(const ScenarioSpec& spec);
ScenarioData generate(const ScenarioSpec& spec, Rng& rng);

/// Mixture density of population j at x under the generating design.
double true_density(const ScenarioSpec& spec, std::size_t population, double x);

}  // namespace hhdp
