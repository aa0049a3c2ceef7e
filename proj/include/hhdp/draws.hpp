#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hhdp/nig.hpp"
#include "hhdp/peppf.hpp"

namespace hhdp {

enum class Model { HHDP, NDP };
enum class SamplerKind { Blocked, Marginal };

std::string to_string(Model m);
std::string to_string(SamplerKind s);
Model parse_model(const std::string& s);
SamplerKind parse_sampler(const std::string& s);

/// One kept MCMC iteration, in a sampler-independent form:
/// - z[j]: distributional cluster of population j (0-based)
/// - zeta[j][i]: component of X_{j,i}, an index into `atoms`
/// - weights[j]: mixture weights of population j over `atoms`
/// so that f_j(x) = Σ_a weights[j][a] N(x | atoms[a]).
struct Draw {
    int chain = 0;
    std::size_t iteration = 0;
    std::vector<std::size_t> z;
    std::vector<std::vector<std::size_t>> zeta;
    std::vector<Atom> atoms;
    std::vector<std::vector<double>> weights;
    std::vector<double> pi_star;  // empty for the marginal sampler
    std::vector<double> omega0;   // empty for NDP and the marginal sampler

    /// ζ labels of all observations, population by population.
    std::vector<int> flat_labels() const;
    /// z as ints, for partition helpers.
    std::vector<int> population_labels() const;
};

struct DrawsMeta {
    Model model = Model::HHDP;
    SamplerKind sampler = SamplerKind::Blocked;
    std::vector<std::size_t> sizes;
    std::size_t K = 0;
    std::size_t L = 0;
    HhdpParams params;
    NigParams nig;
    std::size_t iterations = 0;
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    std::size_t chains = 1;
    std::string config_hash;
    std::string data_hash;
    double data_min = 0.0;
    double data_max = 0.0;

    std::size_t populations() const { return sizes.size(); }
};

struct PosteriorDraws {
    DrawsMeta meta;
    std::vector<Draw> draws;

    /// Throws ShapeError if any draw disagrees with meta.sizes.
    void validate() const;
};

}  // namespace hhdp
