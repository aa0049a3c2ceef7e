#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hhdp/draws.hpp"
#include "hhdp/nig.hpp"
#include "hhdp/peppf.hpp"
#include "hhdp/random.hpp"

namespace hhdp {

struct SamplerConfig {
    Model model = Model::HHDP;
    std::size_t K = 50;
    std::size_t L = 50;
    std::size_t iterations = 10000;
    std::size_t burn_in = 5000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    int chain = 0;

    void validate() const;
};

/// Component-wise adaptive random-walk state for the base weights.
/// Step sizes are adapted every `batch_size` sweeps towards an acceptance
/// rate of 0.44 by ±min(0.01, b^{-1/2}) on the log scale (batch b).
struct AdaptiveMh {
    static constexpr std::size_t batch_size = 50;
    static constexpr double target_rate = 0.44;

    std::vector<double> log_step;         // L − 1 coordinates
    std::vector<std::size_t> batch_accepts;
    std::size_t sweeps_in_batch = 0;
    std::size_t batches = 0;
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    bool frozen = false;

    double acceptance_rate() const {
        return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
    }
};

/// Latent state of the blocked conditional sampler under a K×L finite
/// Dirichlet truncation. Atoms are shared (index l) under HHDP and
/// private to each distributional cluster (index k·L + l) under NDP.
struct BlockedState {
    std::vector<Atom> atoms;
    std::vector<double> pi_star, log_pi;            // K
    std::vector<double> omega0, log_omega0;         // L (HHDP only)
    std::vector<double> omega, log_omega;           // K×L row-major
    std::vector<std::size_t> z;                     // J
    std::vector<std::vector<std::size_t>> zeta;     // J × I_j, values in [0, L)
    AdaptiveMh mh;
};

class BlockedGibbs {
public:
    BlockedGibbs(GroupedData data, HhdpParams params, NigParams nig, SamplerConfig config);

    /// Steps (1)–(5) in order; NDP replaces (3)–(4) by independent rows.
    void sweep();

    void step_atoms();
    void step_distributional_weights();
    void step_base_weights_mh();
    void step_obs_weights();
    void step_memberships();

    const BlockedState& state() const { return state_; }
    BlockedState& mutable_state() { return state_; }
    const SamplerConfig& config() const { return config_; }
    const GroupedData& data() const { return data_; }

    /// m_k and n_{k,l} recomputed from the labels.
    std::vector<std::size_t> population_counts() const;
    std::vector<std::size_t> observation_counts() const;

    /// Throws NumericalError (with a state dump) on NaN/inf or off-simplex weights.
    void check_state() const;

    Draw snapshot(std::size_t iteration) const;

    Rng& rng() { return rng_; }

private:
    std::size_t atom_index(std::size_t k, std::size_t l) const;
    double base_weights_log_target(const std::vector<double>& log_w,
                                   const std::vector<double>& log_xi, std::size_t rows) const;
    void initialize();
    std::string dump() const;

    GroupedData data_;
    HhdpParams params_;
    NigParams nig_;
    SamplerConfig config_;
    Rng rng_;
    BlockedState state_;

    // flattened observations and scratch buffers
    std::vector<double> x_;
    std::vector<std::size_t> offset_;
    std::vector<double> lik_, row_max_, dots_;
};

using DrawSink = std::function<void(const Draw&)>;

/// Runs one chain; post-burn-in draws with (iteration − burn_in) % thin == 0
/// are passed to `sink`. Deterministic given the configuration.
void run_blocked_gibbs(const GroupedData& data, const HhdpParams& params, const NigParams& nig,
                       const SamplerConfig& config, const DrawSink& sink);

PosteriorDraws run_blocked_gibbs(const GroupedData& data, const HhdpParams& params,
                                 const NigParams& nig, const SamplerConfig& config);

}  // namespace hhdp
