#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "hhdp/draws.hpp"
#include "hhdp/partitions.hpp"
#include "hhdp/peppf.hpp"

namespace hhdp {

enum class Level { Observations, Populations };

struct DensitySummary {
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> lower;  // 2.5% pointwise
    std::vector<double> upper;  // 97.5% pointwise
};

/// f_j(x) = Σ_a weights[j][a] N(x | atom a) per draw, summarised across draws
/// by the mean and equal-tailed type-7 percentiles. `grid` must be sorted.
DensitySummary density_estimate(const PosteriorDraws& draws, std::size_t population,
                                std::span<const double> grid);

/// All populations in one pass over the draws.
std::vector<DensitySummary> density_estimates(const PosteriorDraws& draws,
                                              std::span<const double> grid);

/// Type-7 sample quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double p);

struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

/// Posterior co-clustering frequencies of observations (ζ) or populations (z).
SquareMatrix coclustering_matrix(const PosteriorDraws& draws, Level level);

/// Partition of the draw at the given level.
SetPartition draw_partition(const Draw& d, Level level);

/// Variation of information in nats.
double vi_distance(const SetPartition& p, const SetPartition& q);

struct ViEstimate {
    SetPartition partition;
    double expected_loss = 0.0;
    std::size_t candidates = 0;
};

/// Visited partition minimising the average VI to all partitions; ties go
/// to fewer blocks, then to the earliest visit.
ViEstimate vi_point_estimate(std::span<const SetPartition> partitions);
ViEstimate vi_point_estimate(const PosteriorDraws& draws, Level level);

/// Posterior of the number of distinct ζ values in use across all populations.
std::map<std::size_t, double> n_components_posterior(const PosteriorDraws& draws);

/// Observational clusters split by the blocks of the distributional point
/// estimate: occupied only by populations of block 1, only of block 2, or
/// by both. With a single block every cluster counts as within block 1.
struct SharedClustersSummary {
    SetPartition population_estimate;
    std::map<std::size_t, double> only_first;
    std::map<std::size_t, double> only_second;
    std::map<std::size_t, double> shared;
};

SharedClustersSummary shared_clusters_summary(const PosteriorDraws& draws);
SharedClustersSummary shared_clusters_summary(const PosteriorDraws& draws,
                                              const SetPartition& population_estimate);

/// Frequency of z_a = z_b across draws.
double homogeneity_probability(const PosteriorDraws& draws, std::size_t a = 0,
                               std::size_t b = 1);

/// Exact P(G₁ = G₂ | X) for two populations.
double homogeneity_probability(const GroupedCounts& counts, const HhdpParams& params);

/// counts[j][c]: observations of population j in cluster c of an
/// observational partition; clusters ordered by total size, largest first.
std::vector<std::vector<std::size_t>> cluster_frequency_table(const SetPartition& p,
                                                              std::span<const std::size_t> sizes);

}  // namespace hhdp
