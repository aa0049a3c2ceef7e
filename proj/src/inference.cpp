#include "hhdp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hhdp/errors.hpp"
#include "hhdp/kernels.hpp"

namespace hhdp {

namespace {

void require_draws(const PosteriorDraws& draws) {
    if (draws.draws.empty()) throw UsageError("no posterior draws to summarise");
}

std::vector<double> xlogx_table(std::size_t n) {
    std::vector<double> t(n + 1, 0.0);
    for (std::size_t k = 2; k <= n; ++k) {
        const double v = static_cast<double>(k);
        t[k] = v * std::log(v);
    }
    return t;
}

struct CompactPartition {
    std::vector<std::uint32_t> labels;
    std::vector<std::size_t> sizes;
    double size_term = 0.0;  // Σ_a n_a ln n_a
};

CompactPartition compact(const SetPartition& p, const std::vector<double>& xlogx) {
    CompactPartition c;
    const auto lab = p.labels();
    c.labels.assign(lab.begin(), lab.end());
    c.sizes = p.block_sizes();
    for (std::size_t s : c.sizes) c.size_term += xlogx[s];
    return c;
}

// n·VI = Σ n_a ln n_a + Σ n_b ln n_b − 2 Σ n_ab ln n_ab
double scaled_vi(const CompactPartition& a, const CompactPartition& b,
                 const std::vector<double>& xlogx, std::vector<std::uint32_t>& buf) {
    const std::size_t nb = b.sizes.size();
    buf.assign(a.sizes.size() * nb, 0);
    const std::size_t n = a.labels.size();
    for (std::size_t i = 0; i < n; ++i) ++buf[a.labels[i] * nb + b.labels[i]];
    double joint = 0.0;
    for (std::uint32_t v : buf) joint += xlogx[v];
    return std::max(0.0, a.size_term + b.size_term - 2.0 * joint);
}

}  // namespace

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw UsageError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<DensitySummary> density_estimates(const PosteriorDraws& draws,
                                              std::span<const double> grid) {
    require_draws(draws);
    if (!std::is_sorted(grid.begin(), grid.end())) throw UsageError("density grid must be sorted");
    const std::size_t J = draws.meta.populations();
    const std::size_t G = grid.size();
    const std::size_t B = draws.draws.size();

    // values[j][g][b]
    std::vector<std::vector<std::vector<double>>> values(
        J, std::vector<std::vector<double>>(G, std::vector<double>(B)));
    std::vector<double> mu, log_norm, nhp, lik, row_max, weights, out;
    for (std::size_t b = 0; b < B; ++b) {
        const Draw& d = draws.draws[b];
        const std::size_t A = d.atoms.size();
        mu.resize(A);
        log_norm.resize(A);
        nhp.resize(A);
        for (std::size_t a = 0; a < A; ++a) {
            mu[a] = d.atoms[a].mu;
            log_norm[a] = -0.5 * std::log(2.0 * std::numbers::pi * d.atoms[a].sigma2);
            nhp[a] = -0.5 / d.atoms[a].sigma2;
        }
        lik.resize(G * A);
        row_max.resize(G);
        kernels::gaussian_scaled_likelihood(grid, {mu, log_norm, nhp}, lik, row_max);
        weights.resize(J * A);
        for (std::size_t j = 0; j < J; ++j) {
            std::copy(d.weights[j].begin(), d.weights[j].end(), weights.begin() + j * A);
        }
        out.resize(G * J);
        kernels::mixture_dot(lik, G, A, weights, J, out);
        for (std::size_t g = 0; g < G; ++g) {
            const double scale = std::exp(row_max[g]);
            for (std::size_t j = 0; j < J; ++j) values[j][g][b] = out[g * J + j] * scale;
        }
    }

    std::vector<DensitySummary> result(J);
    for (std::size_t j = 0; j < J; ++j) {
        auto& s = result[j];
        s.grid.assign(grid.begin(), grid.end());
        s.mean.resize(G);
        s.lower.resize(G);
        s.upper.resize(G);
        for (std::size_t g = 0; g < G; ++g) {
            const auto& v = values[j][g];
            double total = 0.0;
            for (double x : v) total += x;
            s.mean[g] = total / static_cast<double>(B);
            s.lower[g] = std::min(quantile_type7(v, 0.025), s.mean[g]);
            s.upper[g] = std::max(quantile_type7(v, 0.975), s.mean[g]);
        }
    }
    return result;
}

DensitySummary density_estimate(const PosteriorDraws& draws, std::size_t population,
                                std::span<const double> grid) {
    require_draws(draws);
    if (population >= draws.meta.populations()) throw ShapeError("population index out of range");
    return density_estimates(draws, grid)[population];
}

SetPartition draw_partition(const Draw& d, Level level) {
    if (level == Level::Populations) {
        const auto labels = d.population_labels();
        return SetPartition::from_labels(labels);
    }
    const auto labels = d.flat_labels();
    return SetPartition::from_labels(labels);
}

SquareMatrix coclustering_matrix(const PosteriorDraws& draws, Level level) {
    require_draws(draws);
    std::size_t n = 0;
    if (level == Level::Populations) {
        n = draws.meta.populations();
    } else {
        for (std::size_t s : draws.meta.sizes) n += s;
    }
    std::vector<std::uint64_t> hits(n * n, 0);
    std::vector<int> labels;
    for (const auto& d : draws.draws) {
        labels = level == Level::Populations ? d.population_labels() : d.flat_labels();
        if (labels.size() != n) throw ShapeError("draw does not match the declared sample sizes");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (labels[i] == labels[j]) ++hits[i * n + j];
            }
        }
    }
    SquareMatrix m;
    m.n = n;
    m.values.assign(n * n, 0.0);
    const double B = static_cast<double>(draws.draws.size());
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            m(i, j) = m(j, i) = static_cast<double>(hits[i * n + j]) / B;
        }
    }
    return m;
}

double vi_distance(const SetPartition& p, const SetPartition& q) {
    if (p.ground_size() != q.ground_size()) {
        throw ShapeError("VI needs partitions of the same ground set");
    }
    const std::size_t n = p.ground_size();
    if (n == 0) return 0.0;
    const auto xlogx = xlogx_table(n);
    std::vector<std::uint32_t> buf;
    return scaled_vi(compact(p, xlogx), compact(q, xlogx), xlogx, buf) / static_cast<double>(n);
}

ViEstimate vi_point_estimate(std::span<const SetPartition> partitions) {
    if (partitions.empty()) throw UsageError("no partitions to summarise");
    const std::size_t n = partitions.front().ground_size();
    std::vector<std::size_t> first_seen;
    std::vector<double> weight;
    std::map<std::vector<std::vector<std::size_t>>, std::size_t> index;
    for (std::size_t b = 0; b < partitions.size(); ++b) {
        if (partitions[b].ground_size() != n) throw ShapeError("partitions of different sizes");
        auto [it, fresh] = index.try_emplace(partitions[b].blocks(), first_seen.size());
        if (fresh) {
            first_seen.push_back(b);
            weight.push_back(0.0);
        }
        weight[it->second] += 1.0;
    }
    const std::size_t U = first_seen.size();
    const auto xlogx = xlogx_table(n);
    std::vector<CompactPartition> uniq;
    uniq.reserve(U);
    for (std::size_t u = 0; u < U; ++u) uniq.push_back(compact(partitions[first_seen[u]], xlogx));

    std::vector<double> loss(U, 0.0);
    std::vector<std::uint32_t> buf;
    for (std::size_t a = 0; a < U; ++a) {
        for (std::size_t b = a + 1; b < U; ++b) {
            const double v = scaled_vi(uniq[a], uniq[b], xlogx, buf);
            loss[a] += weight[b] * v;
            loss[b] += weight[a] * v;
        }
    }
    const double scale = 1.0 / (static_cast<double>(partitions.size()) *
                                static_cast<double>(std::max<std::size_t>(n, 1)));
    std::size_t best = 0;
    for (std::size_t u = 1; u < U; ++u) {
        const double tol = 1e-12 * std::max(1.0, std::abs(loss[best]));
        const bool better = loss[u] < loss[best] - tol;
        const bool tie = std::abs(loss[u] - loss[best]) <= tol;
        if (better || (tie && uniq[u].sizes.size() < uniq[best].sizes.size())) best = u;
    }
    return {partitions[first_seen[best]], loss[best] * scale, U};
}

ViEstimate vi_point_estimate(const PosteriorDraws& draws, Level level) {
    require_draws(draws);
    std::vector<SetPartition> parts;
    parts.reserve(draws.draws.size());
    for (const auto& d : draws.draws) parts.push_back(draw_partition(d, level));
    return vi_point_estimate(parts);
}

std::map<std::size_t, double> n_components_posterior(const PosteriorDraws& draws) {
    require_draws(draws);
    std::map<std::size_t, double> table;
    std::vector<int> labels;
    for (const auto& d : draws.draws) {
        labels = d.flat_labels();
        std::sort(labels.begin(), labels.end());
        const auto k = static_cast<std::size_t>(std::unique(labels.begin(), labels.end()) -
                                                labels.begin());
        table[k] += 1.0;
    }
    for (auto& [k, v] : table) v /= static_cast<double>(draws.draws.size());
    return table;
}

SharedClustersSummary shared_clusters_summary(const PosteriorDraws& draws,
                                              const SetPartition& estimate) {
    require_draws(draws);
    const std::size_t J = draws.meta.populations();
    if (estimate.ground_size() != J) throw ShapeError("population partition has the wrong size");
    std::vector<int> side(J, -1);
    for (std::size_t j : estimate.blocks()[0]) side[j] = 0;
    if (estimate.num_blocks() > 1) {
        for (std::size_t j : estimate.blocks()[1]) side[j] = 1;
    }

    SharedClustersSummary s;
    s.population_estimate = estimate;
    for (const auto& d : draws.draws) {
        std::map<std::size_t, int> seen;  // bit 0: block 1, bit 1: block 2
        for (std::size_t j = 0; j < J; ++j) {
            if (side[j] < 0) continue;
            for (std::size_t c : d.zeta[j]) seen[c] |= 1 << side[j];
        }
        std::size_t first = 0, second = 0, both = 0;
        for (const auto& [c, mask] : seen) {
            if (mask == 3) ++both;
            else if (mask == 1) ++first;
            else ++second;
        }
        s.only_first[first] += 1.0;
        s.only_second[second] += 1.0;
        s.shared[both] += 1.0;
    }
    const double B = static_cast<double>(draws.draws.size());
    for (auto* t : {&s.only_first, &s.only_second, &s.shared}) {
        for (auto& [k, v] : *t) v /= B;
    }
    return s;
}

SharedClustersSummary shared_clusters_summary(const PosteriorDraws& draws) {
    return shared_clusters_summary(draws, vi_point_estimate(draws, Level::Populations).partition);
}

double homogeneity_probability(const PosteriorDraws& draws, std::size_t a, std::size_t b) {
    require_draws(draws);
    if (a >= draws.meta.populations() || b >= draws.meta.populations()) {
        throw ShapeError("population index out of range");
    }
    std::size_t hits = 0;
    for (const auto& d : draws.draws) hits += d.z[a] == d.z[b] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(draws.draws.size());
}

double homogeneity_probability(const GroupedCounts& counts, const HhdpParams& params) {
    return posterior_degeneracy_prob(counts, params);
}

std::vector<std::vector<std::size_t>> cluster_frequency_table(const SetPartition& p,
                                                              std::span<const std::size_t> sizes) {
    std::size_t n = 0;
    for (std::size_t s : sizes) n += s;
    if (n != p.ground_size()) throw ShapeError("partition does not cover the samples");
    std::vector<std::size_t> pop_of(n);
    for (std::size_t j = 0, i = 0; j < sizes.size(); ++j) {
        for (std::size_t k = 0; k < sizes[j]; ++k) pop_of[i++] = j;
    }
    std::vector<std::size_t> order(p.num_blocks());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p.blocks()[a].size() > p.blocks()[b].size();
    });
    std::vector<std::vector<std::size_t>> table(sizes.size(),
                                                std::vector<std::size_t>(order.size(), 0));
    for (std::size_t c = 0; c < order.size(); ++c) {
        for (std::size_t i : p.blocks()[order[c]]) ++table[pop_of[i]][c];
    }
    return table;
}

}  // namespace hhdp
