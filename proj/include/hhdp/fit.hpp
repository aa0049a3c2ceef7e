#pragma once

#include <cstddef>
#include <iosfwd>

#include "hhdp/draws.hpp"
#include "hhdp/io.hpp"
#include "hhdp/nig.hpp"

namespace hhdp {

/// Fixed NIG parameters, or the data-driven defaults when the config says "auto".
NigParams resolve_nig(const RunConfig& config, const GroupedData& data);

DrawsMeta make_meta(const RunConfig& config, const GroupedData& data);

/// Runs config.chains chains (chain c seeded from derive_stream_seed(seed, c))
/// on up to `threads` worker threads; draws are ordered by chain, then iteration.
PosteriorDraws run_fit(const GroupedData& data, const RunConfig& config, std::size_t threads = 1);

/// Same, streaming the meta record and one draw record per line to `out`.
/// A single chain is written as it runs; several chains are buffered per
/// chain and appended in chain order.
void run_fit(const GroupedData& data, const RunConfig& config, std::size_t threads,
             std::ostream& out);

}  // namespace hhdp
