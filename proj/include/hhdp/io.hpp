#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hhdp/draws.hpp"
#include "hhdp/nig.hpp"
#include "hhdp/partitions.hpp"
#include "hhdp/peppf.hpp"
#include "hhdp/scenarios.hpp"

namespace hhdp {

struct LoadedData {
    GroupedData data;
    std::vector<std::vector<std::size_t>> truth;  // empty without a truth column; 0-based
};

/// Header `population,value[,truth_component]`; populations are positive
/// integers that must form 1..J. Within-population file order is kept.
LoadedData load_grouped_csv(const std::filesystem::path& path);
LoadedData parse_grouped_csv(std::istream& in, const std::string& source = "<input>");

void write_grouped_csv(std::ostream& out, const GroupedData& data,
                       const std::vector<std::vector<std::size_t>>& truth = {});

/// Count matrix for the peppf command: one population per line,
/// comma-separated non-negative integers; an optional non-numeric header
/// line is skipped.
GroupedCounts load_counts_csv(const std::filesystem::path& path);

struct RunConfig {
    Model model = Model::HHDP;
    SamplerKind sampler = SamplerKind::Blocked;
    HhdpParams params;
    std::optional<NigParams> nig;  // nullopt: "auto"
    std::size_t K = 50;
    std::size_t L = 50;
    std::size_t iterations = 10000;
    std::size_t burn_in = 5000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::size_t chains = 1;

    /// Throws UsageError; `populations` enables the marginal-sampler check.
    void validate(std::optional<std::size_t> populations = std::nullopt) const;
};

/// Missing keys take defaults; unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// 64-bit FNV-1a of `bytes`, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string config_hash(const RunConfig& c);
std::string data_hash(const GroupedData& data);

nlohmann::json to_json(const DrawsMeta& m);
DrawsMeta meta_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Draw& d);
Draw draw_from_json(const nlohmann::json& j);

/// One compact JSON document per line, '\n' terminated.
std::string ndjson_line(const nlohmann::json& j);

struct ReadDrawsResult {
    PosteriorDraws draws;
    nlohmann::json meta_json;
    bool truncated_tail = false;
};

/// Parses a draw file. A final line without its newline is treated as a
/// torn write: it is skipped and a warning goes to `warn` (if given).
/// Any other malformed line is a DataError naming the line number.
ReadDrawsResult read_draws(const std::filesystem::path& path, std::ostream* warn = nullptr);
ReadDrawsResult read_draws(std::istream& in, std::ostream* warn = nullptr);

struct SummaryOptions {
    std::size_t grid_points = 201;
    std::optional<double> grid_min;
    std::optional<double> grid_max;
};

/// Writes density_pop<j>.csv, cocluster_obs.csv, cocluster_pop.csv,
/// ncomp.csv, vi_partition.json and report.json into `dir`.
void write_summary(const ReadDrawsResult& draws, const std::filesystem::path& dir,
                   const SummaryOptions& options = {});

/// "%.10g" rendering used by every CSV writer.
std::string format_number(double v);

}  // namespace hhdp
