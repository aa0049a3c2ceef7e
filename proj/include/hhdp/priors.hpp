#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hhdp/peppf.hpp"
#include "hhdp/random.hpp"

namespace hhdp {

/// Var[G_j(A)] for H(A) = h_a.
double prior_variance(double h_a, const HhdpParams& params);

/// Corr[G_j(A), G_j'(A)], j ≠ j'; free of A.
double prior_corr_measures(const HhdpParams& params);

/// Corr(X_{j,i}, X_{j',i'}) = P(X_{j,i} = X_{j',i'}).
double prior_corr_observations(const HhdpParams& params, bool same_population);

struct PriorMoments {
    double variance = 0.0;
    double correlation_same_pop = 0.0;
    double correlation_cross_pop = 0.0;
    double correlation_measures = 0.0;
};

PriorMoments prior_moments(double h_a, const HhdpParams& params);

/// One draw from the finite Dirichlet approximation of an HHDP:
/// π* ~ Dir(α/K), ω*₀ ~ Dir(β₀/L), ω*_k | ω*₀ ~ Dir(β ω*₀), z_j ~ π*,
/// atoms X*_l ~ H.
struct FiniteTrajectory {
    std::vector<double> pi_star;             // K
    std::vector<double> omega0;              // L
    std::vector<std::vector<double>> omega;  // K rows of length L
    std::vector<std::size_t> z;              // J, 0-based
    std::vector<double> atoms;               // L
};

using BaseMeasure = std::function<double(Rng&)>;

FiniteTrajectory sample_prior_trajectory(const HhdpParams& params, std::size_t J, std::size_t K,
                                         std::size_t L, const BaseMeasure& base, Rng& rng);

struct MomentEstimate {
    double analytic = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;

    double z_score() const { return std_error > 0.0 ? (estimate - analytic) / std_error : 0.0; }
};

struct PriorCheckResult {
    MomentEstimate variance;
    MomentEstimate correlation_measures;
    MomentEstimate tie_same_pop;
    MomentEstimate tie_cross_pop;
    std::size_t replicates = 0;
};

struct PriorCheckConfig {
    std::size_t K = 200;
    std::size_t L = 200;
    std::size_t replicates = 50000;
    std::size_t batches = 100;   // batch-means standard errors; one RNG stream per batch
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

/// Monte Carlo check of the closed-form moments with H = N(0, 1) and
/// A = (−∞, 0). Tie probabilities are Rao–Blackwellised:
/// Σ_l ω_{z₁,l}² (same population) and Σ_l ω_{z₁,l} ω_{z₂,l} (cross).
/// Batch b draws from stream derive_stream_seed(seed, b), so results do not
/// depend on the thread count.
PriorCheckResult prior_monte_carlo(const HhdpParams& params, const PriorCheckConfig& config);

}  // namespace hhdp
