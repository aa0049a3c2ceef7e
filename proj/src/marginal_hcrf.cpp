#include "hhdp/marginal_hcrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hhdp/errors.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp {

namespace {
constexpr std::size_t kNoDish = std::numeric_limits<std::size_t>::max();
}

std::size_t MarginalState::restaurant_customers(std::size_t r) const {
    std::size_t n = 0;
    for (const auto& t : tables) {
        if (t.restaurant == r) n += t.customers.size();
    }
    return n;
}

std::size_t MarginalState::total_tables() const { return tables.size(); }

MarginalHcrf::MarginalHcrf(GroupedData data, HhdpParams params, NigParams nig,
                           std::uint64_t seed, int chain)
    : data_(std::move(data)), params_(params), nig_(nig), chain_(chain),
      rng_(derive_stream_seed(seed, static_cast<std::uint64_t>(chain))) {
    data_.validate();
    params_.validate();
    nig_.validate();
    if (data_.populations() != 2) {
        throw UsageError("the marginal sampler handles exactly two populations");
    }
    offset_.push_back(0);
    for (const auto& pop : data_.values) {
        x_.insert(x_.end(), pop.begin(), pop.end());
        offset_.push_back(x_.size());
    }
    for (double x : x_) log_prior_pred_.push_back(nig_log_predictive(nig_, ClusterStats{}, x));

    // every observation at its own table with its own dish
    state_.table_of.resize(x_.size());
    for (std::size_t obs = 0; obs < x_.size(); ++obs) {
        state_.dishes.push_back({});
        const std::size_t t = open_table(population_of(obs), state_.dishes.size() - 1);
        seat(obs, t);
    }
}

std::size_t MarginalHcrf::population_of(std::size_t obs) const { return obs < offset_[1] ? 0 : 1; }

std::size_t MarginalHcrf::restaurant_of(std::size_t obs) const {
    return state_.delta ? 0 : population_of(obs);
}

std::size_t MarginalHcrf::open_table(std::size_t restaurant, std::size_t dish) {
    MarginalState::Table t;
    t.restaurant = restaurant;
    t.dish = dish;
    state_.tables.push_back(std::move(t));
    ++state_.dishes[dish].tables;
    return state_.tables.size() - 1;
}

void MarginalHcrf::seat(std::size_t obs, std::size_t table) {
    auto& t = state_.tables[table];
    t.customers.push_back(obs);
    t.stats.add(x_[obs]);
    state_.dishes[t.dish].stats.add(x_[obs]);
    state_.table_of[obs] = table;
}

void MarginalHcrf::remove_table(std::size_t t) {
    auto& tables = state_.tables;
    const std::size_t last = tables.size() - 1;
    if (t != last) {
        tables[t] = std::move(tables[last]);
        for (std::size_t c : tables[t].customers) state_.table_of[c] = t;
    }
    tables.pop_back();
}

void MarginalHcrf::remove_dish(std::size_t d) {
    auto& dishes = state_.dishes;
    const std::size_t last = dishes.size() - 1;
    if (d != last) {
        dishes[d] = dishes[last];
        for (auto& t : state_.tables) {
            if (t.dish == last) t.dish = d;
        }
    }
    dishes.pop_back();
}

void MarginalHcrf::detach_customer(std::size_t obs) {
    const std::size_t t = state_.table_of[obs];
    auto& table = state_.tables[t];
    const std::size_t d = table.dish;
    table.stats.remove(x_[obs]);
    state_.dishes[d].stats.remove(x_[obs]);
    table.customers.erase(std::find(table.customers.begin(), table.customers.end(), obs));
    if (!table.customers.empty()) return;
    remove_table(t);
    if (--state_.dishes[d].tables == 0) remove_dish(d);
}

GroupedCounts MarginalHcrf::dish_counts() const {
    std::vector<std::vector<std::uint32_t>> rows(2,
                                                 std::vector<std::uint32_t>(state_.dishes.size()));
    for (std::size_t obs = 0; obs < x_.size(); ++obs) {
        ++rows[population_of(obs)][state_.tables[state_.table_of[obs]].dish];
    }
    return GroupedCounts(std::move(rows));
}

void MarginalHcrf::update_delta() {
    const GroupedCounts counts = dish_counts();
    const double p = posterior_degeneracy_prob(counts, params_);
    state_.delta = uniform_open(rng_) < p;

    const std::size_t D = state_.dishes.size();
    const std::size_t R = state_.delta ? 1 : 2;
    std::vector<std::size_t> dish_of(x_.size());
    for (std::size_t obs = 0; obs < x_.size(); ++obs) {
        dish_of[obs] = state_.tables[state_.table_of[obs]].dish;
    }
    std::vector<std::vector<std::uint32_t>> rc(R, std::vector<std::uint32_t>(D, 0));
    for (std::size_t obs = 0; obs < x_.size(); ++obs) ++rc[restaurant_of(obs)][dish_of[obs]];
    const auto ell = sample_table_counts(GroupedCounts(rc), params_.hdp, rng_);

    state_.tables.clear();
    for (auto& dish : state_.dishes) dish.tables = 0;
    std::vector<std::size_t> group;
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t d = 0; d < D; ++d) {
            if (rc[r][d] == 0) continue;
            group.clear();
            for (std::size_t obs = 0; obs < x_.size(); ++obs) {
                if (dish_of[obs] == d && restaurant_of(obs) == r) group.push_back(obs);
            }
            const auto seating = sample_seating(rc[r][d], ell[r][d], rng_);
            const std::size_t first = state_.tables.size();
            for (std::uint32_t k = 0; k < ell[r][d]; ++k) open_table(r, d);
            for (std::size_t c = 0; c < group.size(); ++c) {
                auto& t = state_.tables[first + seating[c]];
                t.customers.push_back(group[c]);
                t.stats.add(x_[group[c]]);
                state_.table_of[group[c]] = first + seating[c];
            }
        }
    }
}

void MarginalHcrf::update_table(std::size_t obs) {
    detach_customer(obs);
    const std::size_t r = restaurant_of(obs);
    const double x = x_[obs];
    const double beta = params_.hdp.beta;
    const double beta0 = params_.hdp.beta0;
    const std::size_t D = state_.dishes.size();
    const double ell = static_cast<double>(state_.total_tables());

    std::vector<double> pred(D);
    for (std::size_t d = 0; d < D; ++d) pred[d] = nig_log_predictive(nig_, state_.dishes[d].stats, x);

    std::vector<std::size_t> own;
    std::vector<double> lw;
    for (std::size_t t = 0; t < state_.tables.size(); ++t) {
        const auto& table = state_.tables[t];
        if (table.restaurant != r) continue;
        own.push_back(t);
        lw.push_back(std::log(static_cast<double>(table.customers.size())) + pred[table.dish]);
    }
    const double log_new_table = std::log(beta) - std::log(ell + beta0);
    for (std::size_t d = 0; d < D; ++d) {
        lw.push_back(log_new_table + std::log(static_cast<double>(state_.dishes[d].tables)) +
                     pred[d]);
    }
    lw.push_back(log_new_table + std::log(beta0) + log_prior_pred_[obs]);

    const std::size_t pick = sample_log_categorical(rng_, lw);
    if (pick < own.size()) {
        seat(obs, own[pick]);
    } else if (pick < own.size() + D) {
        seat(obs, open_table(r, pick - own.size()));
    } else {
        state_.dishes.push_back({});
        seat(obs, open_table(r, state_.dishes.size() - 1));
    }
}

void MarginalHcrf::update_dish(std::size_t t) {
    auto& dishes = state_.dishes;
    const ClusterStats block = state_.tables[t].stats;
    const std::size_t d0 = state_.tables[t].dish;
    dishes[d0].stats.unmerge(block);
    state_.tables[t].dish = kNoDish;
    if (--dishes[d0].tables == 0) remove_dish(d0);

    const std::size_t D = dishes.size();
    std::vector<double> lw(D + 1);
    for (std::size_t d = 0; d < D; ++d) {
        ClusterStats joined = dishes[d].stats;
        joined.merge(block);
        lw[d] = std::log(static_cast<double>(dishes[d].tables)) +
                nig_log_marginal(nig_, joined) - nig_log_marginal(nig_, dishes[d].stats);
    }
    lw[D] = std::log(params_.hdp.beta0) + nig_log_marginal(nig_, block);

    std::size_t d = sample_log_categorical(rng_, lw);
    if (d == D) dishes.push_back({});
    state_.tables[t].dish = d;
    dishes[d].stats.merge(block);
    ++dishes[d].tables;
}

void MarginalHcrf::sweep() {
    update_delta();
    for (std::size_t obs = 0; obs < x_.size(); ++obs) update_table(obs);
    for (std::size_t t = 0; t < state_.tables.size(); ++t) update_dish(t);
}

void MarginalHcrf::check_counts() const {
    const auto& s = state_;
    std::vector<std::size_t> seated(s.tables.size(), 0);
    std::vector<std::size_t> dish_obs(s.dishes.size(), 0);
    std::vector<std::size_t> dish_tables(s.dishes.size(), 0);
    auto fail = [](const std::string& what) {
        throw NumericalError("marginal sampler bookkeeping: " + what);
    };
    for (std::size_t obs = 0; obs < x_.size(); ++obs) {
        const std::size_t t = s.table_of[obs];
        if (t >= s.tables.size()) fail("customer at a missing table");
        if (s.tables[t].restaurant != restaurant_of(obs)) fail("customer in the wrong restaurant");
        ++seated[t];
        ++dish_obs[s.tables[t].dish];
    }
    for (std::size_t t = 0; t < s.tables.size(); ++t) {
        const auto& table = s.tables[t];
        if (table.dish >= s.dishes.size()) fail("table without a dish");
        if (seated[t] == 0) fail("empty table kept");
        if (seated[t] != table.customers.size() || seated[t] != table.stats.n) {
            fail("table occupancy out of sync");
        }
        ++dish_tables[table.dish];
    }
    for (std::size_t d = 0; d < s.dishes.size(); ++d) {
        if (dish_tables[d] == 0) fail("empty dish kept");
        if (dish_tables[d] != s.dishes[d].tables) fail("dish table count out of sync");
        if (dish_obs[d] != s.dishes[d].stats.n) fail("dish customer count out of sync");
    }
}

Draw MarginalHcrf::snapshot(std::size_t iteration) {
    const auto& s = state_;
    const double beta = params_.hdp.beta;
    const double beta0 = params_.hdp.beta0;
    const std::size_t D = s.dishes.size();
    const double ell = static_cast<double>(s.total_tables());

    Draw d;
    d.chain = chain_;
    d.iteration = iteration;
    d.z = {0, s.delta ? std::size_t{0} : std::size_t{1}};
    d.zeta.resize(2);
    for (std::size_t obs = 0; obs < x_.size(); ++obs) {
        d.zeta[population_of(obs)].push_back(s.tables[s.table_of[obs]].dish);
    }
    for (const auto& dish : s.dishes) d.atoms.push_back(sample_nig(nig_posterior_update(nig_, dish.stats), rng_));
    d.atoms.push_back(sample_nig(nig_, rng_));

    d.weights.assign(2, std::vector<double>(D + 1, 0.0));
    for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t r = s.delta ? 0 : j;
        std::vector<double> q(D, 0.0);
        double qr = 0.0;
        for (const auto& t : s.tables) {
            if (t.restaurant != r) continue;
            q[t.dish] += static_cast<double>(t.customers.size());
            qr += static_cast<double>(t.customers.size());
        }
        for (std::size_t k = 0; k < D; ++k) {
            d.weights[j][k] = (q[k] + beta * static_cast<double>(s.dishes[k].tables) / (ell + beta0)) /
                              (qr + beta);
        }
        d.weights[j][D] = beta * beta0 / ((qr + beta) * (ell + beta0));
    }
    return d;
}

void run_marginal_gibbs(const GroupedData& data, const HhdpParams& params, const NigParams& nig,
                        const SamplerConfig& config, const DrawSink& sink) {
    if (config.iterations <= config.burn_in) throw UsageError("iterations must exceed burn_in");
    if (config.thin < 1) throw UsageError("thin must be at least 1");
    MarginalHcrf g(data, params, nig, config.seed, config.chain);
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        g.sweep();
        if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) sink(g.snapshot(it));
    }
}

PosteriorDraws run_marginal_gibbs(const GroupedData& data, const HhdpParams& params,
                                  const NigParams& nig, const SamplerConfig& config) {
    PosteriorDraws out;
    auto& m = out.meta;
    m.model = Model::HHDP;
    m.sampler = SamplerKind::Marginal;
    m.sizes = data.sizes();
    m.params = params;
    m.nig = nig;
    m.iterations = config.iterations;
    m.burn_in = config.burn_in;
    m.thin = config.thin;
    m.seed = config.seed;
    run_marginal_gibbs(data, params, nig, config, [&](const Draw& d) { out.draws.push_back(d); });
    return out;
}

}  // namespace hhdp
