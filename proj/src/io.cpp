#include "hhdp/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hhdp/errors.hpp"
#include "hhdp/inference.hpp"

namespace hhdp {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

template <typename T>
bool parse_unsigned(const std::string& s, T& v) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string at_line(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

LoadedData parse_grouped_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) {
            header = split_csv(line);
            break;
        }
    }
    if (header.empty()) throw DataError(source + ": empty file");
    if (header.size() < 2 || header[0] != "population" || header[1] != "value" ||
        (header.size() == 3 && header[2] != "truth_component") || header.size() > 3) {
        throw DataError(at_line(source, lineno) +
                        "expected header population,value[,truth_component]");
    }
    const bool has_truth = header.size() == 3;

    std::map<std::uint64_t, std::vector<double>> values;
    std::map<std::uint64_t, std::vector<std::size_t>> truth;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size()) {
            throw DataError(at_line(source, lineno) + "expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(f.size()));
        }
        std::uint64_t pop = 0;
        if (!parse_unsigned(f[0], pop) || pop == 0) {
            throw DataError(at_line(source, lineno) + "population must be a positive integer, got '" +
                            f[0] + "'");
        }
        double x = 0.0;
        if (!parse_double(f[1], x) || !std::isfinite(x)) {
            throw DataError(at_line(source, lineno) + "non-numeric or non-finite value '" + f[1] +
                            "'");
        }
        values[pop].push_back(x);
        if (has_truth) {
            std::size_t c = 0;
            if (!parse_unsigned(f[2], c) || c == 0) {
                throw DataError(at_line(source, lineno) +
                                "truth_component must be a positive integer, got '" + f[2] + "'");
            }
            truth[pop].push_back(c - 1);
        }
    }
    if (values.empty()) throw DataError(source + ": no observations");
    LoadedData out;
    std::uint64_t expect = 1;
    for (auto& [pop, v] : values) {
        if (pop != expect) {
            throw DataError(source + ": population ids must be contiguous 1.." +
                            std::to_string(values.size()) + " (population " +
                            std::to_string(expect) + " is missing)");
        }
        ++expect;
        out.data.values.push_back(std::move(v));
        if (has_truth) out.truth.push_back(std::move(truth[pop]));
    }
    return out;
}

LoadedData load_grouped_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_grouped_csv(in, path.string());
}

void write_grouped_csv(std::ostream& out, const GroupedData& data,
                       const std::vector<std::vector<std::size_t>>& truth) {
    const bool with_truth = !truth.empty();
    out << (with_truth ? "population,value,truth_component\n" : "population,value\n");
    char buf[40];
    for (std::size_t j = 0; j < data.values.size(); ++j) {
        for (std::size_t i = 0; i < data.values[j].size(); ++i) {
            // 17 significant digits round-trip exactly
            std::snprintf(buf, sizeof buf, "%.17g", data.values[j][i]);
            out << (j + 1) << ',' << buf;
            if (with_truth) out << ',' << (truth[j][i] + 1);
            out << '\n';
        }
    }
}

GroupedCounts load_counts_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::vector<std::uint32_t>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        std::vector<std::uint32_t> row;
        bool numeric = true;
        for (const auto& cell : f) {
            std::uint32_t v = 0;
            if (!parse_unsigned(cell, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw DataError(at_line(path.string(), lineno) +
                            "counts must be non-negative integers");
        }
        first = false;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path.string() + ": no count rows");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw DataError(path.string() + ": ragged count rows");
    }
    for (std::size_t d = 0; d < rows.front().size(); ++d) {
        std::uint64_t t = 0;
        for (const auto& r : rows) t += r[d];
        if (t == 0) {
            throw DataError(path.string() + ": column " + std::to_string(d + 1) + " is all zeros");
        }
    }
    return GroupedCounts(std::move(rows));
}

void RunConfig::validate(std::optional<std::size_t> populations) const {
    params.validate();
    if (nig) nig->validate();
    if (K < 1 || L < 1) throw UsageError("K and L must be positive");
    if (iterations <= burn_in) throw UsageError("iterations must exceed burn_in");
    if (thin < 1) throw UsageError("thin must be at least 1");
    if (chains < 1) throw UsageError("chains must be at least 1");
    if (sampler == SamplerKind::Marginal) {
        if (model != Model::HHDP) throw UsageError("the marginal sampler implements HHDP only");
        if (populations && *populations != 2) {
            throw UsageError("the marginal sampler requires exactly two populations");
        }
    }
}

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw UsageError("run config must be a JSON object");
    static const char* known[] = {"model", "sampler", "alpha",   "beta", "beta0",
                                  "nig",   "K",       "L",       "iterations",
                                  "burn_in", "thin",  "seed",    "chains"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw UsageError("unknown run config key '" + key + "'");
        }
    }
    RunConfig c;
    try {
        if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
        if (j.contains("sampler")) c.sampler = parse_sampler(j.at("sampler").get<std::string>());
        if (j.contains("alpha")) c.params.alpha = j.at("alpha").get<double>();
        if (j.contains("beta")) c.params.hdp.beta = j.at("beta").get<double>();
        if (j.contains("beta0")) c.params.hdp.beta0 = j.at("beta0").get<double>();
        if (j.contains("nig")) {
            const auto& n = j.at("nig");
            if (n.is_string()) {
                if (n.get<std::string>() != "auto") throw UsageError("nig must be \"auto\" or an object");
            } else {
                NigParams p;
                p.mu0 = n.at("mu0").get<double>();
                p.lambda0 = n.at("lambda0").get<double>();
                p.s0 = n.at("s0").get<double>();
                p.S0 = n.at("S0").get<double>();
                c.nig = p;
            }
        }
        if (j.contains("K")) c.K = j.at("K").get<std::size_t>();
        if (j.contains("L")) c.L = j.at("L").get<std::size_t>();
        if (j.contains("iterations")) c.iterations = j.at("iterations").get<std::size_t>();
        if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<std::size_t>();
        if (j.contains("thin")) c.thin = j.at("thin").get<std::size_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("chains")) c.chains = j.at("chains").get<std::size_t>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed run config: ") + e.what());
    }
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["model"] = to_string(c.model);
    j["sampler"] = to_string(c.sampler);
    j["alpha"] = c.params.alpha;
    j["beta"] = c.params.hdp.beta;
    j["beta0"] = c.params.hdp.beta0;
    if (c.nig) {
        j["nig"] = {{"mu0", c.nig->mu0}, {"lambda0", c.nig->lambda0}, {"s0", c.nig->s0},
                    {"S0", c.nig->S0}};
    } else {
        j["nig"] = "auto";
    }
    j["K"] = c.K;
    j["L"] = c.L;
    j["iterations"] = c.iterations;
    j["burn_in"] = c.burn_in;
    j["thin"] = c.thin;
    j["seed"] = c.seed;
    j["chains"] = c.chains;
    return j;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const RunConfig& c) { return fnv1a_hex(to_json(c).dump()); }

std::string data_hash(const GroupedData& data) {
    std::ostringstream os;
    write_grouped_csv(os, data);
    return fnv1a_hex(os.str());
}

json to_json(const DrawsMeta& m) {
    json j;
    j["type"] = "meta";
    j["format"] = "hhdp-draws/1";
    j["model"] = to_string(m.model);
    j["sampler"] = to_string(m.sampler);
    j["J"] = m.sizes.size();
    j["sizes"] = m.sizes;
    j["K"] = m.K;
    j["L"] = m.L;
    j["alpha"] = m.params.alpha;
    j["beta"] = m.params.hdp.beta;
    j["beta0"] = m.params.hdp.beta0;
    j["nig"] = {{"mu0", m.nig.mu0}, {"lambda0", m.nig.lambda0}, {"s0", m.nig.s0},
                {"S0", m.nig.S0}};
    j["iterations"] = m.iterations;
    j["burn_in"] = m.burn_in;
    j["thin"] = m.thin;
    j["seed"] = m.seed;
    j["chains"] = m.chains;
    j["config_hash"] = m.config_hash;
    j["data_hash"] = m.data_hash;
    j["data_range"] = {m.data_min, m.data_max};
    return j;
}

DrawsMeta meta_from_json(const json& j) {
    if (j.value("type", "") != "meta" || j.value("format", "") != "hhdp-draws/1") {
        throw DataError("draw file does not start with an hhdp-draws/1 meta record");
    }
    DrawsMeta m;
    m.model = parse_model(j.at("model").get<std::string>());
    m.sampler = parse_sampler(j.at("sampler").get<std::string>());
    m.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    m.K = j.at("K").get<std::size_t>();
    m.L = j.at("L").get<std::size_t>();
    m.params.alpha = j.at("alpha").get<double>();
    m.params.hdp.beta = j.at("beta").get<double>();
    m.params.hdp.beta0 = j.at("beta0").get<double>();
    const auto& n = j.at("nig");
    m.nig = {n.at("mu0").get<double>(), n.at("lambda0").get<double>(), n.at("s0").get<double>(),
             n.at("S0").get<double>()};
    m.iterations = j.at("iterations").get<std::size_t>();
    m.burn_in = j.at("burn_in").get<std::size_t>();
    m.thin = j.at("thin").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.chains = j.at("chains").get<std::size_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.data_hash = j.value("data_hash", "");
    if (j.contains("data_range")) {
        m.data_min = j.at("data_range").at(0).get<double>();
        m.data_max = j.at("data_range").at(1).get<double>();
    }
    return m;
}

json to_json(const Draw& d) {
    json j;
    j["type"] = "draw";
    j["chain"] = d.chain;
    j["iter"] = d.iteration;
    std::vector<std::size_t> z(d.z);
    for (auto& v : z) ++v;
    j["z"] = z;
    json zeta = json::array();
    for (const auto& pop : d.zeta) {
        std::vector<std::size_t> row(pop);
        for (auto& v : row) ++v;
        zeta.push_back(row);
    }
    j["zeta"] = std::move(zeta);
    json atoms = json::array();
    for (const auto& a : d.atoms) atoms.push_back({a.mu, a.sigma2});
    j["atoms"] = std::move(atoms);
    j["weights"] = d.weights;
    j["pi"] = d.pi_star;
    j["omega0"] = d.omega0;
    return j;
}

Draw draw_from_json(const json& j) {
    if (j.value("type", "") != "draw") throw DataError("expected a draw record");
    Draw d;
    d.chain = j.at("chain").get<int>();
    d.iteration = j.at("iter").get<std::size_t>();
    d.z = j.at("z").get<std::vector<std::size_t>>();
    for (auto& v : d.z) {
        if (v == 0) throw DataError("labels in draw records are 1-based");
        --v;
    }
    d.zeta = j.at("zeta").get<std::vector<std::vector<std::size_t>>>();
    for (auto& pop : d.zeta) {
        for (auto& v : pop) {
            if (v == 0) throw DataError("labels in draw records are 1-based");
            --v;
        }
    }
    for (const auto& a : j.at("atoms")) d.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    d.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    d.pi_star = j.at("pi").get<std::vector<double>>();
    d.omega0 = j.at("omega0").get<std::vector<double>>();
    return d;
}

std::string ndjson_line(const json& j) { return j.dump() + '\n'; }

ReadDrawsResult read_draws(std::istream& in, std::ostream* warn) {
    ReadDrawsResult out;
    std::string line;
    std::size_t lineno = 0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        ++lineno;
        const bool complete = !in.eof();
        if (!complete) {
            if (line.empty()) break;
            out.truncated_tail = true;
            if (warn) {
                *warn << "warning: line " << lineno
                      << " of the draw file is incomplete (no trailing newline); skipped\n";
            }
            break;
        }
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("draw file line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            if (!have_meta) {
                out.draws.meta = meta_from_json(j);
                out.meta_json = j;
                have_meta = true;
            } else {
                out.draws.draws.push_back(draw_from_json(j));
            }
        } catch (const json::exception& e) {
            throw DataError("draw file line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("draw file line " + std::to_string(lineno) + ": " + e.what());
        } catch (const UsageError& e) {
            throw DataError("draw file line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_meta) throw DataError("draw file has no meta record");
    try {
        out.draws.validate();
    } catch (const ShapeError& e) {
        throw DataError(e.what());
    }
    return out;
}

ReadDrawsResult read_draws(const std::filesystem::path& path, std::ostream* warn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_draws(in, warn);
}

namespace {

json table_json(const std::map<std::size_t, double>& t) {
    json a = json::array();
    for (const auto& [k, v] : t) a.push_back({{"count", k}, {"probability", v}});
    return a;
}

json blocks_json(const SetPartition& p) {
    json a = json::array();
    for (const auto& b : p.blocks()) {
        std::vector<std::size_t> one(b);
        for (auto& v : one) ++v;
        a.push_back(one);
    }
    return a;
}

void write_matrix(const std::filesystem::path& p, const SquareMatrix& m) {
    auto f = open_out(p);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) {
            if (j) f << ',';
            f << format_number(m(i, j));
        }
        f << '\n';
    }
}

}  // namespace

void write_summary(const ReadDrawsResult& in, const std::filesystem::path& dir,
                   const SummaryOptions& options) {
    const PosteriorDraws& draws = in.draws;
    if (draws.draws.empty()) throw UsageError("the draw file contains no draws");
    std::filesystem::create_directories(dir);
    const auto& meta = draws.meta;
    const std::size_t J = meta.populations();

    double lo = meta.data_min;
    double hi = meta.data_max;
    const double pad = std::max(1.0, 0.25 * (hi - lo));
    lo = options.grid_min.value_or(lo - pad);
    hi = options.grid_max.value_or(hi + pad);
    if (!(hi > lo) || options.grid_points < 2) throw UsageError("invalid density grid");
    std::vector<double> grid(options.grid_points);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid.size() - 1);
    }
    const auto dens = density_estimates(draws, grid);
    for (std::size_t j = 0; j < J; ++j) {
        auto f = open_out(dir / ("density_pop" + std::to_string(j + 1) + ".csv"));
        f << "x,mean,lower,upper\n";
        for (std::size_t g = 0; g < grid.size(); ++g) {
            f << format_number(grid[g]) << ',' << format_number(dens[j].mean[g]) << ','
              << format_number(dens[j].lower[g]) << ',' << format_number(dens[j].upper[g]) << '\n';
        }
    }

    write_matrix(dir / "cocluster_obs.csv", coclustering_matrix(draws, Level::Observations));
    const SquareMatrix pop = coclustering_matrix(draws, Level::Populations);
    write_matrix(dir / "cocluster_pop.csv", pop);

    const auto ncomp = n_components_posterior(draws);
    {
        auto f = open_out(dir / "ncomp.csv");
        f << "components,probability\n";
        for (const auto& [k, v] : ncomp) f << k << ',' << format_number(v) << '\n';
    }

    const ViEstimate vi_pop = vi_point_estimate(draws, Level::Populations);
    const ViEstimate vi_obs = vi_point_estimate(draws, Level::Observations);
    json vi;
    vi["units"] = "nats";
    vi["populations"] = {{"blocks", blocks_json(vi_pop.partition)},
                         {"expected_loss", vi_pop.expected_loss},
                         {"candidates", vi_pop.candidates}};
    std::vector<int> labels = vi_obs.partition.labels();
    for (auto& v : labels) ++v;
    vi["observations"] = {{"n_clusters", vi_obs.partition.num_blocks()},
                          {"labels", labels},
                          {"frequency_table", cluster_frequency_table(vi_obs.partition, meta.sizes)},
                          {"expected_loss", vi_obs.expected_loss},
                          {"candidates", vi_obs.candidates}};
    open_out(dir / "vi_partition.json") << vi.dump(2) << '\n';

    json report;
    report["config_hash"] = meta.config_hash;
    report["data_hash"] = meta.data_hash;
    report["seed"] = meta.seed;
    report["model"] = to_string(meta.model);
    report["sampler"] = to_string(meta.sampler);
    report["chains"] = meta.chains;
    report["draws"] = draws.draws.size();
    report["truncated_tail_skipped"] = in.truncated_tail;
    report["units"] = "nats";
    json pairs = json::array();
    for (std::size_t a = 0; a < J; ++a) {
        for (std::size_t b = a + 1; b < J; ++b) {
            pairs.push_back({{"populations", {a + 1, b + 1}}, {"probability", pop(a, b)}});
        }
    }
    report["population_coclustering"] = pairs;
    if (J >= 2) report["homogeneity_probability"] = homogeneity_probability(draws, 0, 1);
    report["n_components"] = table_json(ncomp);
    report["vi_populations"] = blocks_json(vi_pop.partition);
    report["vi_observation_clusters"] = vi_obs.partition.num_blocks();
    if (J >= 2) {
        const auto shared = shared_clusters_summary(draws, vi_pop.partition);
        report["shared_clusters"] = {{"only_first_block", table_json(shared.only_first)},
                                     {"only_second_block", table_json(shared.only_second)},
                                     {"shared", table_json(shared.shared)}};
    }
    open_out(dir / "report.json") << report.dump(2) << '\n';
}

}  // namespace hhdp
