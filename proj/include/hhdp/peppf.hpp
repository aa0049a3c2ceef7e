#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hhdp/partitions.hpp"
#include "hhdp/random.hpp"

namespace hhdp {

/// Concentrations of an HDP(β, β₀; H): β for the population-level DPs,
/// β₀ for the shared base DP.
struct HdpParams {
    double beta = 1.0;
    double beta0 = 1.0;

    void validate() const;
};

/// HHDP(α, β, β₀; H): α drives ties among population distributions.
struct HhdpParams {
    double alpha = 1.0;
    HdpParams hdp;

    void validate() const;
};

/// ln Φ_{D,1}: EPPF of a single-sample HDP evaluated at positive
/// frequencies n*_1..n*_D.
double hdp_log_eppf_single(std::span<const std::uint64_t> col_counts, const HdpParams& params);

/// ln Φ_{D,R}: pEPPF of an R-sample HDP. Zero cells contribute no tables.
double hdp_log_peppf_multi(const GroupedCounts& counts, const HdpParams& params);

/// ln Π_D: HHDP pEPPF, the Ewens mixture over partitions of the J
/// populations of HDP pEPPFs of the merged counts. J ≤ 12.
double hhdp_log_peppf(const GroupedCounts& counts, const HhdpParams& params);

/// P(G₁ = G₂ | X) for two populations with frequencies given by `counts`.
double posterior_degeneracy_prob(const GroupedCounts& counts, const HhdpParams& params);

/// Draws table counts ℓ_{r,d} from their conditional law given the
/// frequencies of an R-sample HDP (restaurants r, dishes d):
///   p(ℓ) ∝ β^{|ℓ|} / (β₀)_{|ℓ|} ∏_d (ℓ_{·,d} − 1)! ∏_r |s(n_{r,d}, ℓ_{r,d})|.
/// Zero cells get ℓ = 0.
std::vector<std::vector<std::uint32_t>> sample_table_counts(const GroupedCounts& counts,
                                                            const HdpParams& params, Rng& rng);

/// Seats n customers at exactly `tables` tables, uniformly over seatings
/// weighted by ∏ (q_t − 1)! (i.e. the cycles of a uniform permutation with
/// that many cycles). Returns a table label in [0, tables) per customer.
std::vector<std::uint32_t> sample_seating(std::uint32_t n, std::uint32_t tables, Rng& rng);

}  // namespace hhdp
