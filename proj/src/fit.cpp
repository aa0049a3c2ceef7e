#include "hhdp/fit.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "hhdp/blocked_gibbs.hpp"
#include "hhdp/marginal_hcrf.hpp"

namespace hhdp {

namespace {

SamplerConfig sampler_config(const RunConfig& c, std::size_t chain) {
    SamplerConfig s;
    s.model = c.model;
    s.K = c.K;
    s.L = c.L;
    s.iterations = c.iterations;
    s.burn_in = c.burn_in;
    s.thin = c.thin;
    s.seed = c.seed;
    s.chain = static_cast<int>(chain);
    return s;
}

void run_chain(const GroupedData& data, const RunConfig& config, const NigParams& nig,
               std::size_t chain, const DrawSink& sink) {
    const SamplerConfig sc = sampler_config(config, chain);
    if (config.sampler == SamplerKind::Marginal) {
        run_marginal_gibbs(data, config.params, nig, sc, sink);
    } else {
        run_blocked_gibbs(data, config.params, nig, sc, sink);
    }
}

// Runs body(chain) for every chain on a small pool; rethrows the first failure.
template <typename Body>
void for_each_chain(std::size_t chains, std::size_t threads, Body body) {
    threads = std::max<std::size_t>(1, std::min(threads, chains));
    if (threads == 1) {
        for (std::size_t c = 0; c < chains; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chains; c = next++) {
                try {
                    body(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

NigParams resolve_nig(const RunConfig& config, const GroupedData& data) {
    return config.nig ? *config.nig : auto_nig(data);
}

DrawsMeta make_meta(const RunConfig& config, const GroupedData& data) {
    DrawsMeta m;
    m.model = config.model;
    m.sampler = config.sampler;
    m.sizes = data.sizes();
    m.K = config.sampler == SamplerKind::Blocked ? config.K : 0;
    m.L = config.sampler == SamplerKind::Blocked ? config.L : 0;
    m.params = config.params;
    m.nig = resolve_nig(config, data);
    m.iterations = config.iterations;
    m.burn_in = config.burn_in;
    m.thin = config.thin;
    m.seed = config.seed;
    m.chains = config.chains;
    m.config_hash = config_hash(config);
    m.data_hash = data_hash(data);
    bool first = true;
    for (const auto& pop : data.values) {
        for (double x : pop) {
            m.data_min = first ? x : std::min(m.data_min, x);
            m.data_max = first ? x : std::max(m.data_max, x);
            first = false;
        }
    }
    return m;
}

PosteriorDraws run_fit(const GroupedData& data, const RunConfig& config, std::size_t threads) {
    config.validate(data.populations());
    PosteriorDraws out;
    out.meta = make_meta(config, data);
    std::vector<std::vector<Draw>> per_chain(config.chains);
    for_each_chain(config.chains, threads, [&](std::size_t c) {
        run_chain(data, config, out.meta.nig, c,
                  [&per_chain, c](const Draw& d) { per_chain[c].push_back(d); });
    });
    for (auto& chain : per_chain) {
        for (auto& d : chain) out.draws.push_back(std::move(d));
    }
    return out;
}

void run_fit(const GroupedData& data, const RunConfig& config, std::size_t threads,
             std::ostream& out) {
    config.validate(data.populations());
    const DrawsMeta meta = make_meta(config, data);
    out << ndjson_line(to_json(meta));
    if (config.chains == 1) {
        run_chain(data, config, meta.nig, 0,
                  [&out](const Draw& d) { out << ndjson_line(to_json(d)) << std::flush; });
        return;
    }
    std::vector<std::string> buffers(config.chains);
    for_each_chain(config.chains, threads, [&](std::size_t c) {
        run_chain(data, config, meta.nig, c,
                  [&buffers, c](const Draw& d) { buffers[c] += ndjson_line(to_json(d)); });
    });
    for (const auto& b : buffers) out << b;
    out.flush();
}

}  // namespace hhdp
