#include "hhdp/draws.hpp"

#include <string>

#include "hhdp/errors.hpp"

namespace hhdp {

std::string to_string(Model m) { return m == Model::HHDP ? "HHDP" : "NDP"; }

std::string to_string(SamplerKind s) { return s == SamplerKind::Blocked ? "blocked" : "marginal"; }

Model parse_model(const std::string& s) {
    if (s == "HHDP" || s == "hhdp") return Model::HHDP;
    if (s == "NDP" || s == "ndp") return Model::NDP;
    throw UsageError("unknown model '" + s + "' (expected HHDP or NDP)");
}

SamplerKind parse_sampler(const std::string& s) {
    if (s == "blocked") return SamplerKind::Blocked;
    if (s == "marginal") return SamplerKind::Marginal;
    throw UsageError("unknown sampler '" + s + "' (expected blocked or marginal)");
}

std::vector<int> Draw::flat_labels() const {
    std::vector<int> out;
    for (const auto& pop : zeta) {
        for (std::size_t c : pop) out.push_back(static_cast<int>(c));
    }
    return out;
}

std::vector<int> Draw::population_labels() const {
    return std::vector<int>(z.begin(), z.end());
}

void PosteriorDraws::validate() const {
    const std::size_t J = meta.populations();
    for (const auto& d : draws) {
        if (d.z.size() != J || d.zeta.size() != J || d.weights.size() != J) {
            throw ShapeError("draw at iteration " + std::to_string(d.iteration) +
                             " does not match the declared population count");
        }
        for (std::size_t j = 0; j < J; ++j) {
            if (d.zeta[j].size() != meta.sizes[j]) {
                throw ShapeError("draw at iteration " + std::to_string(d.iteration) +
                                 " has the wrong sample size for population " +
                                 std::to_string(j + 1));
            }
            if (d.weights[j].size() != d.atoms.size()) {
                throw ShapeError("draw weights do not match its atom table");
            }
            for (std::size_t c : d.zeta[j]) {
                if (c >= d.atoms.size()) throw ShapeError("component label out of range");
            }
        }
    }
}

}  // namespace hhdp
