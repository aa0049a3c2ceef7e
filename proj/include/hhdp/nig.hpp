#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hhdp/random.hpp"

namespace hhdp {

/// Observations grouped by population: values[j] holds X_{j,1..I_j}.
struct GroupedData {
    std::vector<std::vector<double>> values;

    std::size_t populations() const { return values.size(); }
    std::size_t total() const;
    std::vector<std::size_t> sizes() const;
    /// Pooled mean and (population, i.e. 1/n) variance of all observations.
    double pooled_mean() const;
    double pooled_variance() const;

    /// Throws DataError on an empty population list or non-finite values.
    void validate() const;
};

/// Normal–inverse-gamma base measure: σ² ~ IG(s, S), μ | σ² ~ N(mu, σ²/λ).
struct NigParams {
    double mu0 = 0.0;
    double lambda0 = 1.0;
    double s0 = 1.0;
    double S0 = 1.0;

    void validate() const;
    friend bool operator==(const NigParams&, const NigParams&) = default;
};

/// μ₀ = ȳ, λ₀ = 1/(3 Var y), s₀ = 1, S₀ = 4 from the pooled data.
NigParams auto_nig(const GroupedData& data);

/// Running size, mean and deviance Σ(x − mean)² of a cluster, with removal.
struct ClusterStats {
    std::size_t n = 0;
    double mean = 0.0;
    double deviance = 0.0;

    void add(double x);
    void remove(double x);
    void merge(const ClusterStats& other);
    void unmerge(const ClusterStats& part);
};

ClusterStats cluster_stats(std::span<const double> values);

/// Conjugate update; an empty cluster returns the prior.
NigParams nig_posterior_update(const NigParams& prior, std::span<const double> cluster_values);
NigParams nig_posterior_update(const NigParams& prior, const ClusterStats& stats);

/// ln ∫ ∏ N(x_i | μ, σ²) dNIG(μ, σ²) for a cluster summarised by `stats`.
double nig_log_marginal(const NigParams& prior, const ClusterStats& stats);

/// ln p(x | cluster) = log marginal of cluster ∪ {x} minus that of the
/// cluster: a Student-t predictive density.
double nig_log_predictive(const NigParams& prior, const ClusterStats& stats, double x);

struct Atom {
    double mu = 0.0;
    double sigma2 = 1.0;
    friend bool operator==(const Atom&, const Atom&) = default;
};

/// σ² ~ IG(s, S), μ | σ² ~ N(mu0, σ²/λ0).
Atom sample_nig(const NigParams& p, Rng& rng);

}  // namespace hhdp
