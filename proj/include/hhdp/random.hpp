#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hhdp {

using Rng = std::mt19937_64;

/// Seed of worker stream `stream` derived from `master`: one splitmix64
/// step applied to master + (stream + 1) * 0x9E3779B97F4A7C15.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream);

/// Uniform draw on the open interval (0, 1).
double uniform_open(Rng& rng);

double standard_normal(Rng& rng);

/// ln G with G ~ Gamma(shape, 1). Stays finite for shapes down to ~1e-300,
/// where the linear-scale variate underflows to zero.
double log_gamma_variate(Rng& rng, double shape);

/// Gamma(shape, rate) draw.
double gamma_variate(Rng& rng, double shape, double rate);

/// Log weights of a Dirichlet(alpha) draw. Shapes below 1e-300 are floored.
std::vector<double> log_dirichlet(Rng& rng, std::span<const double> alpha);

/// Linear Dirichlet(alpha) draw: every entry at least 1e-300, renormalised.
std::vector<double> dirichlet(Rng& rng, std::span<const double> alpha);

/// Index drawn with probability proportional to exp(log_weights). Throws
/// NumericalError if every weight is −inf or any is NaN.
std::size_t sample_log_categorical(Rng& rng, std::span<const double> log_weights);

}  // namespace hhdp
