#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hhdp/blocked_gibbs.hpp"
#include "hhdp/draws.hpp"
#include "hhdp/nig.hpp"
#include "hhdp/peppf.hpp"
#include "hhdp/random.hpp"

namespace hhdp {

/// Latent state of the hidden Chinese restaurant franchise for two
/// populations. With delta set, both populations sit in restaurant 0;
/// otherwise population j sits in restaurant j.
struct MarginalState {
    struct Table {
        std::size_t restaurant = 0;
        std::size_t dish = 0;
        std::vector<std::size_t> customers;  // flat observation indices
        ClusterStats stats;
    };
    struct Dish {
        std::size_t tables = 0;  // ℓ_{·,d}
        ClusterStats stats;
    };

    bool delta = false;
    std::vector<std::size_t> table_of;  // T per flat observation
    std::vector<Table> tables;
    std::vector<Dish> dishes;

    std::size_t restaurant_customers(std::size_t r) const;
    std::size_t total_tables() const;
};

class MarginalHcrf {
public:
    MarginalHcrf(GroupedData data, HhdpParams params, NigParams nig, std::uint64_t seed,
                 int chain = 0);

    /// Restaurant indicator, every customer, every table, in that order.
    void sweep();

    /// Draws Δ given the dish allocation with tables integrated out, then
    /// reseats every restaurant from the exact conditional of the tables.
    void update_delta();
    void update_table(std::size_t obs);
    void update_dish(std::size_t table);

    const MarginalState& state() const { return state_; }
    const GroupedData& data() const { return data_; }

    /// Dish frequencies n_{j,d} (J rows, one column per dish).
    GroupedCounts dish_counts() const;

    /// Rebuilds every counter from the labels; throws NumericalError on mismatch.
    void check_counts() const;

    Draw snapshot(std::size_t iteration);

    Rng& rng() { return rng_; }

private:
    std::size_t population_of(std::size_t obs) const;
    std::size_t restaurant_of(std::size_t obs) const;
    void remove_table(std::size_t t);
    void remove_dish(std::size_t d);
    void detach_customer(std::size_t obs);
    void seat(std::size_t obs, std::size_t table);
    std::size_t open_table(std::size_t restaurant, std::size_t dish);

    GroupedData data_;
    HhdpParams params_;
    NigParams nig_;
    int chain_;
    Rng rng_;
    MarginalState state_;
    std::vector<double> x_;
    std::vector<std::size_t> offset_;
    std::vector<double> log_prior_pred_;
};

/// Runs the marginal sampler (two populations only); config.K and config.L
/// are ignored.
void run_marginal_gibbs(const GroupedData& data, const HhdpParams& params, const NigParams& nig,
                        const SamplerConfig& config, const DrawSink& sink);

PosteriorDraws run_marginal_gibbs(const GroupedData& data, const HhdpParams& params,
                                  const NigParams& nig, const SamplerConfig& config);

}  // namespace hhdp
