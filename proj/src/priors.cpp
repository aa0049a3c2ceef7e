#include "hhdp/priors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "hhdp/errors.hpp"

namespace hhdp {

double prior_variance(double h_a, const HhdpParams& params) {
    if (!(h_a >= 0.0 && h_a <= 1.0)) {
        throw DomainError("prior_variance: H(A) must lie in [0, 1], got " + std::to_string(h_a));
    }
    params.validate();
    const double b = params.hdp.beta;
    const double b0 = params.hdp.beta0;
    return h_a * (1.0 - h_a) * (b0 + b + 1.0) / ((b + 1.0) * (b0 + 1.0));
}

double prior_corr_measures(const HhdpParams& params) {
    params.validate();
    const double a = params.alpha;
    return 1.0 - a * params.hdp.beta0 / ((a + 1.0) * (params.hdp.beta + params.hdp.beta0 + 1.0));
}

double prior_corr_observations(const HhdpParams& params, bool same_population) {
    params.validate();
    const double a = params.alpha;
    const double b = params.hdp.beta;
    const double b0 = params.hdp.beta0;
    if (same_population) return (b + b0 + 1.0) / ((b + 1.0) * (b0 + 1.0));
    return 1.0 / (b0 + 1.0) + b0 / ((1.0 + a) * (1.0 + b) * (1.0 + b0));
}

PriorMoments prior_moments(double h_a, const HhdpParams& params) {
    return {prior_variance(h_a, params), prior_corr_observations(params, true),
            prior_corr_observations(params, false), prior_corr_measures(params)};
}

namespace {

std::size_t draw_index(Rng& rng, const std::vector<double>& weights) {
    double u = uniform_open(rng);
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
        u -= weights[k];
        if (u <= 0.0) return k;
    }
    return weights.size() - 1;
}

std::vector<double> child_weights(Rng& rng, double beta, const std::vector<double>& omega0) {
    std::vector<double> shape(omega0.size());
    for (std::size_t l = 0; l < omega0.size(); ++l) shape[l] = beta * omega0[l];
    return dirichlet(rng, shape);
}

}  // namespace

FiniteTrajectory sample_prior_trajectory(const HhdpParams& params, std::size_t J, std::size_t K,
                                         std::size_t L, const BaseMeasure& base, Rng& rng) {
    params.validate();
    if (K < 2 || L < 2) throw DomainError("sample_prior_trajectory: K and L must be >= 2");
    FiniteTrajectory out;
    out.pi_star = dirichlet(rng, std::vector<double>(K, params.alpha / static_cast<double>(K)));
    out.omega0 =
        dirichlet(rng, std::vector<double>(L, params.hdp.beta0 / static_cast<double>(L)));
    out.omega.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.omega.push_back(child_weights(rng, params.hdp.beta, out.omega0));
    }
    out.z.reserve(J);
    for (std::size_t j = 0; j < J; ++j) out.z.push_back(draw_index(rng, out.pi_star));
    out.atoms.reserve(L);
    for (std::size_t l = 0; l < L; ++l) out.atoms.push_back(base(rng));
    return out;
}

namespace {

struct BatchStats {
    double n = 0;
    double sum_g1 = 0, sum_g2 = 0, sum_g1g1 = 0, sum_g2g2 = 0, sum_g1g2 = 0;
    double sum_same = 0, sum_cross = 0;

    void merge(const BatchStats& o) {
        n += o.n;
        sum_g1 += o.sum_g1;
        sum_g2 += o.sum_g2;
        sum_g1g1 += o.sum_g1g1;
        sum_g2g2 += o.sum_g2g2;
        sum_g1g2 += o.sum_g1g2;
        sum_same += o.sum_same;
        sum_cross += o.sum_cross;
    }
    double variance() const {
        const double m = sum_g1 / n;
        return (sum_g1g1 / n - m * m) * n / (n - 1.0);
    }
    double correlation() const {
        const double m1 = sum_g1 / n;
        const double m2 = sum_g2 / n;
        const double cov = sum_g1g2 / n - m1 * m2;
        const double v1 = sum_g1g1 / n - m1 * m1;
        const double v2 = sum_g2g2 / n - m2 * m2;
        return cov / std::sqrt(v1 * v2);
    }
    double tie_same() const { return sum_same / n; }
    double tie_cross() const { return sum_cross / n; }
};

// Only the rows ω*_{z₁}, ω*_{z₂} enter the estimated moments; the other
// K − 2 rows are never drawn.
BatchStats run_batch(const HhdpParams& params, const PriorCheckConfig& cfg, std::size_t reps,
                     Rng& rng) {
    const std::size_t K = cfg.K;
    const std::size_t L = cfg.L;
    const std::vector<double> pi_shape(K, params.alpha / static_cast<double>(K));
    const std::vector<double> base_shape(L, params.hdp.beta0 / static_cast<double>(L));
    std::vector<double> in_a(L);
    BatchStats s;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto pi = dirichlet(rng, pi_shape);
        const std::size_t z1 = draw_index(rng, pi);
        const std::size_t z2 = draw_index(rng, pi);
        const auto omega0 = dirichlet(rng, base_shape);
        for (std::size_t l = 0; l < L; ++l) in_a[l] = standard_normal(rng) < 0.0 ? 1.0 : 0.0;
        const auto row1 = child_weights(rng, params.hdp.beta, omega0);
        const auto row2 = z1 == z2 ? row1 : child_weights(rng, params.hdp.beta, omega0);
        double g1 = 0, g2 = 0, same = 0, cross = 0;
        for (std::size_t l = 0; l < L; ++l) {
            g1 += row1[l] * in_a[l];
            g2 += row2[l] * in_a[l];
            same += row1[l] * row1[l];
            cross += row1[l] * row2[l];
        }
        s.n += 1;
        s.sum_g1 += g1;
        s.sum_g2 += g2;
        s.sum_g1g1 += g1 * g1;
        s.sum_g2g2 += g2 * g2;
        s.sum_g1g2 += g1 * g2;
        s.sum_same += same;
        s.sum_cross += cross;
    }
    return s;
}

MomentEstimate summarize(double analytic, double pooled, const std::vector<double>& per_batch) {
    const double B = static_cast<double>(per_batch.size());
    double mean = 0;
    for (double v : per_batch) mean += v;
    mean /= B;
    double ss = 0;
    for (double v : per_batch) ss += (v - mean) * (v - mean);
    return {analytic, pooled, std::sqrt(ss / (B - 1.0) / B)};
}

}  // namespace

PriorCheckResult prior_monte_carlo(const HhdpParams& params, const PriorCheckConfig& cfg) {
    params.validate();
    if (cfg.K < 2 || cfg.L < 2) throw DomainError("prior_monte_carlo: K and L must be >= 2");
    if (cfg.batches < 2 || cfg.replicates < 2 * cfg.batches) {
        throw DomainError("prior_monte_carlo: need >= 2 batches of >= 2 replicates");
    }
    std::vector<BatchStats> batches(cfg.batches);
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t b = first; b < cfg.batches; b += stride) {
            const std::size_t reps = cfg.replicates / cfg.batches +
                                     (b < cfg.replicates % cfg.batches ? 1 : 0);
            Rng rng(derive_stream_seed(cfg.seed, b));
            batches[b] = run_batch(params, cfg, reps, rng);
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, cfg.batches));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }

    BatchStats pooled;
    std::vector<double> var_b, corr_b, same_b, cross_b;
    for (const auto& b : batches) {
        pooled.merge(b);
        var_b.push_back(b.variance());
        corr_b.push_back(b.correlation());
        same_b.push_back(b.tie_same());
        cross_b.push_back(b.tie_cross());
    }
    const PriorMoments exact = prior_moments(0.5, params);
    PriorCheckResult out;
    out.replicates = cfg.replicates;
    out.variance = summarize(exact.variance, pooled.variance(), var_b);
    out.correlation_measures = summarize(exact.correlation_measures, pooled.correlation(), corr_b);
    out.tie_same_pop = summarize(exact.correlation_same_pop, pooled.tie_same(), same_b);
    out.tie_cross_pop = summarize(exact.correlation_cross_pop, pooled.tie_cross(), cross_b);
    return out;
}

}  // namespace hhdp
