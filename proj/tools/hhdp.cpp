#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hhdp/errors.hpp"
#include "hhdp/fit.hpp"
#include "hhdp/inference.hpp"
#include "hhdp/io.hpp"
#include "hhdp/kernels.hpp"
#include "hhdp/peppf.hpp"
#include "hhdp/priors.hpp"
#include "hhdp/scenarios.hpp"

namespace fs = std::filesystem;
using namespace hhdp;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

std::ofstream open_output(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
}

void apply_kernel(const std::string& name) {
    if (name == "auto") return;
    if (name == "scalar") kernels::set_backend(kernels::Backend::Scalar);
    else if (name == "avx2") kernels::set_backend(kernels::Backend::Avx2);
    else throw UsageError("unknown kernel backend '" + name + "' (auto, scalar or avx2)");
}

struct SimulateArgs {
    std::string scenario = "S1";
    std::uint64_t seed = 1;
    std::string out;
    std::string convention = "variance";
    std::vector<std::size_t> sizes;
};

int cmd_simulate(const SimulateArgs& a) {
    ScenarioSpec spec = make_scenario(parse_scenario(a.scenario), a.seed,
                                      parse_scale_convention(a.convention));
    if (!a.sizes.empty()) {
        if (a.sizes.size() != spec.sizes.size()) {
            throw UsageError("--sizes needs one entry per population of " + a.scenario);
        }
        spec.sizes = a.sizes;
    }
    const ScenarioData d = generate(spec);
    if (a.out.empty()) {
        write_grouped_csv(std::cout, d.data, d.truth);
    } else {
        auto f = open_output(a.out);
        write_grouped_csv(f, d.data, d.truth);
    }
    return kOk;
}

struct FitArgs {
    std::string data;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> chains;
    std::size_t threads = 1;
};

int cmd_fit(const FitArgs& a) {
    const LoadedData loaded = load_grouped_csv(a.data);
    RunConfig cfg;
    if (!a.config.empty()) cfg = load_run_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.chains) cfg.chains = *a.chains;
    cfg.validate(loaded.data.populations());
    if (a.out.empty()) {
        run_fit(loaded.data, cfg, a.threads, std::cout);
    } else {
        auto f = open_output(a.out);
        run_fit(loaded.data, cfg, a.threads, f);
    }
    return kOk;
}

struct SummarizeArgs {
    std::string draws;
    std::string out;
    SummaryOptions options;
    std::optional<double> grid_min, grid_max;
};

int cmd_summarize(SummarizeArgs a) {
    const ReadDrawsResult r = read_draws(a.draws, &std::cerr);
    a.options.grid_min = a.grid_min;
    a.options.grid_max = a.grid_max;
    write_summary(r, a.out, a.options);
    return kOk;
}

struct PeppfArgs {
    std::string counts;
    double alpha = 1.0, beta = 1.0, beta0 = 1.0;
};

int cmd_peppf(const PeppfArgs& a) {
    const GroupedCounts counts = load_counts_csv(a.counts);
    HhdpParams p{a.alpha, {a.beta, a.beta0}};
    std::printf("log_peppf,%.15g\n", hhdp_log_peppf(counts, p));
    if (counts.rows() == 2) {
        std::printf("degeneracy_probability,%.15g\n", posterior_degeneracy_prob(counts, p));
    }
    return kOk;
}

struct PriorArgs {
    double alpha = 1.0, beta = 1.0, beta0 = 1.0;
    PriorCheckConfig cfg;
    std::string out;
    std::string grid_out;
    std::size_t grid_points = 21;
};

int cmd_prior_check(const PriorArgs& a) {
    HhdpParams p{a.alpha, {a.beta, a.beta0}};
    p.validate();
    const PriorCheckResult r = prior_monte_carlo(p, a.cfg);
    std::ostringstream os;
    os << "moment,analytic,estimate,std_error,z_score\n";
    auto row = [&](const char* name, const MomentEstimate& m) {
        os << name << ',' << format_number(m.analytic) << ',' << format_number(m.estimate) << ','
           << format_number(m.std_error) << ',' << format_number(m.z_score()) << '\n';
    };
    row("variance_half_line", r.variance);
    row("corr_measures", r.correlation_measures);
    row("tie_same_population", r.tie_same_pop);
    row("tie_cross_population", r.tie_cross_pop);
    if (a.out.empty()) {
        std::cout << os.str();
    } else {
        open_output(a.out) << os.str();
    }

    if (!a.grid_out.empty()) {
        // analytic correlation surfaces at alpha = 1 on a log-spaced grid in [0.1, 10]
        auto f = open_output(a.grid_out);
        f << "beta,beta0,corr_measures,corr_same_population,corr_cross_population\n";
        const std::size_t G = std::max<std::size_t>(2, a.grid_points);
        for (std::size_t u = 0; u < G; ++u) {
            for (std::size_t v = 0; v < G; ++v) {
                const double b = std::pow(10.0, -1.0 + 2.0 * static_cast<double>(u) / (G - 1));
                const double b0 = std::pow(10.0, -1.0 + 2.0 * static_cast<double>(v) / (G - 1));
                const HhdpParams q{1.0, {b, b0}};
                f << format_number(b) << ',' << format_number(b0) << ','
                  << format_number(prior_corr_measures(q)) << ','
                  << format_number(prior_corr_observations(q, true)) << ','
                  << format_number(prior_corr_observations(q, false)) << '\n';
            }
        }
    }
    return kOk;
}

struct HomogeneityArgs {
    std::string draws;
    std::size_t a = 1, b = 2;
};

int cmd_test_homogeneity(const HomogeneityArgs& h) {
    const ReadDrawsResult r = read_draws(h.draws, &std::cerr);
    if (h.a < 1 || h.b < 1) throw UsageError("population indices are 1-based");
    const double p = homogeneity_probability(r.draws, h.a - 1, h.b - 1);
    std::printf("populations,%zu,%zu\n", h.a, h.b);
    std::printf("draws,%zu\n", r.draws.draws.size());
    std::printf("homogeneity_probability,%.10g\n", p);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hidden hierarchical Dirichlet process mixtures: simulation, fitting and summaries"};
    app.require_subcommand(1);
    std::string kernel = "auto";
    app.add_option("--kernel", kernel, "Kernel backend: auto, scalar or avx2");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario as CSV");
    simulate->add_option("--scenario", sim.scenario, "S1, S2, S3 or S4")->required();
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--out", sim.out, "Output CSV (default: stdout)");
    simulate->add_option("--convention", sim.convention,
                         "Read N(m, s) scales as 'variance' or 'sd'");
    simulate->add_option("--sizes", sim.sizes, "Sample size per population")->delimiter(',');

    FitArgs fit;
    auto* fitcmd = app.add_subcommand("fit", "Run the MCMC sampler and stream draws as NDJSON");
    fitcmd->add_option("--data", fit.data, "Input CSV")->required();
    fitcmd->add_option("--config", fit.config, "Run configuration JSON");
    fitcmd->add_option("--out", fit.out, "Draw file (default: stdout)");
    fitcmd->add_option("--seed", fit.seed, "Override the configured seed");
    fitcmd->add_option("--chains", fit.chains, "Override the configured number of chains");
    fitcmd->add_option("--threads", fit.threads, "Worker threads for chains");

    SummarizeArgs sum;
    auto* summarize = app.add_subcommand("summarize", "Posterior summaries from a draw file");
    summarize->add_option("--draws", sum.draws, "Draw file")->required();
    summarize->add_option("--out", sum.out, "Output directory")->required();
    summarize->add_option("--grid-points", sum.options.grid_points, "Density grid size");
    summarize->add_option("--grid-min", sum.grid_min, "Density grid lower end");
    summarize->add_option("--grid-max", sum.grid_max, "Density grid upper end");

    PeppfArgs pe;
    auto* peppf = app.add_subcommand("peppf", "Evaluate the log pEPPF of a count matrix");
    peppf->add_option("--counts", pe.counts, "Counts CSV, one population per row")->required();
    peppf->add_option("--alpha", pe.alpha);
    peppf->add_option("--beta", pe.beta);
    peppf->add_option("--beta0", pe.beta0);

    PriorArgs pr;
    auto* prior = app.add_subcommand("prior-check", "Monte Carlo check of the prior moments");
    prior->add_option("--alpha", pr.alpha);
    prior->add_option("--beta", pr.beta);
    prior->add_option("--beta0", pr.beta0);
    prior->add_option("--reps", pr.cfg.replicates, "Prior trajectories");
    prior->add_option("--K", pr.cfg.K, "Distributional truncation");
    prior->add_option("--L", pr.cfg.L, "Observational truncation");
    prior->add_option("--batches", pr.cfg.batches, "Batches for standard errors");
    prior->add_option("--seed", pr.cfg.seed, "Random seed");
    prior->add_option("--threads", pr.cfg.threads, "Worker threads");
    prior->add_option("--out", pr.out, "Output CSV (default: stdout)");
    prior->add_option("--grid-out", pr.grid_out, "Also write analytic correlations over a beta/beta0 grid");
    prior->add_option("--grid-points", pr.grid_points, "Grid points per axis");

    HomogeneityArgs ho;
    auto* homog = app.add_subcommand("test-homogeneity", "Posterior probability that two populations share a distribution");
    homog->add_option("--draws", ho.draws, "Draw file")->required();
    homog->add_option("--pop-a", ho.a, "First population (1-based)");
    homog->add_option("--pop-b", ho.b, "Second population (1-based)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        apply_kernel(kernel);
        if (*simulate) return cmd_simulate(sim);
        if (*fitcmd) return cmd_fit(fit);
        if (*summarize) return cmd_summarize(sum);
        if (*peppf) return cmd_peppf(pe);
        if (*prior) return cmd_prior_check(pr);
        if (*homog) return cmd_test_homogeneity(ho);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}
