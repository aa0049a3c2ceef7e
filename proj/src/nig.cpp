#include "hhdp/nig.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hhdp/errors.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp {

std::size_t GroupedData::total() const {
    std::size_t n = 0;
    for (const auto& v : values) n += v.size();
    return n;
}

std::vector<std::size_t> GroupedData::sizes() const {
    std::vector<std::size_t> out;
    for (const auto& v : values) out.push_back(v.size());
    return out;
}

double GroupedData::pooled_mean() const {
    ClusterStats s;
    for (const auto& v : values) {
        for (double x : v) s.add(x);
    }
    return s.mean;
}

double GroupedData::pooled_variance() const {
    ClusterStats s;
    for (const auto& v : values) {
        for (double x : v) s.add(x);
    }
    return s.n > 0 ? s.deviance / static_cast<double>(s.n) : 0.0;
}

void GroupedData::validate() const {
    if (values.empty()) throw DataError("grouped data has no populations");
    for (std::size_t j = 0; j < values.size(); ++j) {
        for (std::size_t i = 0; i < values[j].size(); ++i) {
            if (!std::isfinite(values[j][i])) {
                throw DataError("non-finite observation " + std::to_string(i + 1) +
                                " in population " + std::to_string(j + 1));
            }
        }
    }
}

void NigParams::validate() const {
    if (!std::isfinite(mu0) || !(lambda0 > 0.0) || !(s0 > 0.0) || !(S0 > 0.0) ||
        !std::isfinite(lambda0) || !std::isfinite(s0) || !std::isfinite(S0)) {
        throw DomainError("NIG parameters need finite mu0 and positive lambda0, s0, S0");
    }
}

NigParams auto_nig(const GroupedData& data) {
    const double var = data.pooled_variance();
    if (!(var > 0.0)) throw DataError("auto NIG needs data with positive variance");
    return {data.pooled_mean(), 1.0 / (3.0 * var), 1.0, 4.0};
}

void ClusterStats::add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    deviance += delta * (x - mean);
}

void ClusterStats::remove(double x) {
    if (n <= 1) {
        *this = ClusterStats{};
        return;
    }
    const double old_mean = (mean * static_cast<double>(n) - x) / static_cast<double>(n - 1);
    deviance -= (x - old_mean) * (x - mean);
    if (deviance < 0.0) deviance = 0.0;
    mean = old_mean;
    --n;
}

void ClusterStats::merge(const ClusterStats& o) {
    if (o.n == 0) return;
    if (n == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double delta = o.mean - mean;
    mean += delta * nb / (na + nb);
    deviance += o.deviance + delta * delta * na * nb / (na + nb);
    n += o.n;
}

void ClusterStats::unmerge(const ClusterStats& part) {
    if (part.n == 0) return;
    if (part.n >= n) {
        *this = ClusterStats{};
        return;
    }
    const double nt = static_cast<double>(n);
    const double nb = static_cast<double>(part.n);
    const double na = nt - nb;
    const double rest_mean = (mean * nt - part.mean * nb) / na;
    const double delta = part.mean - rest_mean;
    deviance -= part.deviance + delta * delta * na * nb / nt;
    if (deviance < 0.0) deviance = 0.0;
    mean = rest_mean;
    n -= part.n;
}

ClusterStats cluster_stats(std::span<const double> values) {
    ClusterStats s;
    for (double x : values) {
        if (!std::isfinite(x)) throw DataError("non-finite value in cluster");
        s.add(x);
    }
    return s;
}

NigParams nig_posterior_update(const NigParams& prior, const ClusterStats& s) {
    if (s.n == 0) return prior;
    const double n = static_cast<double>(s.n);
    const double lam = prior.lambda0 + n;
    const double shift = s.mean - prior.mu0;
    return {(n * s.mean + prior.lambda0 * prior.mu0) / lam, lam, prior.s0 + 0.5 * n,
            prior.S0 + 0.5 * (s.deviance + n * prior.lambda0 * shift * shift / lam)};
}

NigParams nig_posterior_update(const NigParams& prior, std::span<const double> cluster_values) {
    prior.validate();
    return nig_posterior_update(prior, cluster_stats(cluster_values));
}

double nig_log_marginal(const NigParams& prior, const ClusterStats& s) {
    if (s.n == 0) return 0.0;
    const NigParams post = nig_posterior_update(prior, s);
    const double n = static_cast<double>(s.n);
    return -0.5 * n * std::log(2.0 * std::numbers::pi) +
           0.5 * (std::log(prior.lambda0) - std::log(post.lambda0)) +
           prior.s0 * std::log(prior.S0) - post.s0 * std::log(post.S0) + log_gamma(post.s0) -
           log_gamma(prior.s0);
}

double nig_log_predictive(const NigParams& prior, const ClusterStats& s, double x) {
    // Student-t with 2s degrees of freedom, location μ, scale² S(λ+1)/(sλ)
    const NigParams post = nig_posterior_update(prior, s);
    const double nu = 2.0 * post.s0;
    const double scale2 = post.S0 * (post.lambda0 + 1.0) / (post.s0 * post.lambda0);
    const double z = (x - post.mu0);
    return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) -
           0.5 * std::log(nu * std::numbers::pi * scale2) -
           0.5 * (nu + 1.0) * std::log1p(z * z / (nu * scale2));
}

Atom sample_nig(const NigParams& p, Rng& rng) {
    const double sigma2 = p.S0 / std::exp(log_gamma_variate(rng, p.s0));
    const double mu = p.mu0 + std::sqrt(sigma2 / p.lambda0) * standard_normal(rng);
    return {mu, sigma2};
}

}  // namespace hhdp
